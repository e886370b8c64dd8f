#include "cae/candidates.hpp"

#include <algorithm>
#include <stdexcept>

namespace cae::model {

using features::Segment;

FramePool::FramePool(std::vector<PooledClip> clips) : clips_(std::move(clips)) {
    for (std::size_t i = 0; i < clips_.size(); ++i) {
        by_video_[clips_[i].video_id].push_back(i);
        for (const auto& o : clips_[i].objects) by_object_[o].push_back(i);
    }
}

const std::vector<std::size_t>& FramePool::clips_of_video(const std::string& video_id) const {
    static const std::vector<std::size_t> none;
    auto it = by_video_.find(video_id);
    return it == by_video_.end() ? none : it->second;
}

std::vector<std::size_t> FramePool::clips_sharing_object(std::size_t clip) const {
    std::set<std::size_t> out;
    for (const auto& o : clips_.at(clip).objects) {
        const auto& v = by_object_.at(o);
        out.insert(v.begin(), v.end());
    }
    return {out.begin(), out.end()};
}

namespace {

FrameRef make_ref(const FramePool& pool, std::size_t clip, std::size_t frame) {
    const auto& c = pool.clip(clip);
    return {clip, frame, c.video_id, c.frames.times.at(frame), c.frames.segments.at(frame)};
}

}  // namespace

CandidateSet mem_candidates(std::size_t target_clip, std::size_t target_frame, const FramePool& pool,
                            NegSampling strategy, Rng& rng, std::size_t cap) {
    const auto& target = pool.clip(target_clip);
    if (target_frame >= target.frames.size() || target.frames.segments[target_frame] != Segment::Aft)
        throw std::invalid_argument("target frame is not an [AFT] frame");

    std::set<std::pair<std::string, std::int64_t>> blocked;
    for (std::size_t f = 0; f < target.frames.size(); ++f) {
        if (target.frames.segments[f] == Segment::Aft)
            blocked.emplace(target.video_id, features::time_key(target.frames.times[f]));
    }

    std::vector<std::size_t> source_clips;
    switch (strategy) {
        case NegSampling::Randomized:
            source_clips.resize(pool.size());
            for (std::size_t i = 0; i < pool.size(); ++i) source_clips[i] = i;
            break;
        case NegSampling::VideoBased:
            source_clips = pool.clips_of_video(target.video_id);
            break;
        case NegSampling::ObjectBased:
            source_clips = pool.clips_sharing_object(target_clip);
            source_clips.push_back(target_clip);
            std::sort(source_clips.begin(), source_clips.end());
            source_clips.erase(std::unique(source_clips.begin(), source_clips.end()), source_clips.end());
            break;
    }

    std::vector<FrameRef> negatives;
    std::set<std::pair<std::string, std::int64_t>> seen = blocked;
    for (std::size_t c : source_clips) {
        const auto& clip = pool.clip(c);
        for (std::size_t f = 0; f < clip.frames.size(); ++f) {
            if (c == target_clip && clip.frames.segments[f] == Segment::Aft) continue;
            if (!seen.emplace(clip.video_id, features::time_key(clip.frames.times[f])).second) continue;
            negatives.push_back(make_ref(pool, c, f));
        }
    }
    if (negatives.empty()) throw std::runtime_error("degenerate candidate set");

    if (negatives.size() > cap) {
        std::vector<std::size_t> idx(negatives.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        for (std::size_t i = 0; i < cap; ++i) {
            const auto j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
            std::swap(idx[i], idx[j]);
        }
        idx.resize(cap);
        std::sort(idx.begin(), idx.end());
        std::vector<FrameRef> kept;
        kept.reserve(cap);
        for (auto i : idx) kept.push_back(std::move(negatives[i]));
        negatives = std::move(kept);
    }

    CandidateSet set;
    set.positive = static_cast<std::size_t>(rng.below(negatives.size() + 1));
    set.provenance = std::move(negatives);
    set.provenance.insert(set.provenance.begin() + static_cast<std::ptrdiff_t>(set.positive),
                          make_ref(pool, target_clip, target_frame));

    const std::size_t dim = target.frames.dim;
    set.features.resize(static_cast<Eigen::Index>(set.provenance.size()), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < set.provenance.size(); ++i) {
        const auto row = pool.clip(set.provenance[i].clip).frames.row(set.provenance[i].frame);
        for (std::size_t d = 0; d < dim; ++d)
            set.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = row[d];
    }
    return set;
}

std::vector<std::pair<std::size_t, CandidateSet>> mem_candidates(std::size_t target_clip, const FramePool& pool,
                                                                 NegSampling strategy, Rng& rng, std::size_t cap) {
    std::vector<std::pair<std::size_t, CandidateSet>> out;
    const auto& frames = pool.clip(target_clip).frames;
    for (std::size_t f = 0; f < frames.size(); ++f) {
        if (frames.segments[f] == Segment::Aft)
            out.emplace_back(f, mem_candidates(target_clip, f, pool, strategy, rng, cap));
    }
    return out;
}

Eigen::VectorXd nce_softmax(const Eigen::VectorXd& scores, double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("temperature must be positive");
    if (scores.size() == 0) throw std::invalid_argument("empty candidate set");
    const Eigen::VectorXd z = scores / tau;
    const Eigen::VectorXd e = (z.array() - z.maxCoeff()).exp();
    return e / e.sum();
}

Eigen::VectorXd nce_probability(const Eigen::VectorXd& query, const CandidateSet& candidates, double tau) {
    return nce_softmax(candidates.features * query, tau);
}

double nce_loss(const Eigen::VectorXd& query, const CandidateSet& candidates, double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("temperature must be positive");
    if (candidates.size() == 0) throw std::invalid_argument("empty candidate set");
    const Eigen::VectorXd z = (candidates.features * query) / tau;
    const double m = z.maxCoeff();
    const double lse = m + std::log((z.array() - m).exp().sum());
    return lse - z(static_cast<Eigen::Index>(candidates.positive));
}

}  // namespace cae::model
