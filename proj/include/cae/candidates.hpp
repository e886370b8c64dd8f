#pragma once

// Candidate frames for masked-effect modeling and the temperature-scaled NCE softmax.

#include <map>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cae/common.hpp"
#include "cae/config.hpp"
#include "cae/features.hpp"

namespace cae::model {

struct FrameRef {
    std::size_t clip = 0;   // index into the FramePool
    std::size_t frame = 0;  // row within that clip's sequence
    std::string video_id;
    double time_s = 0.0;
    features::Segment segment = features::Segment::Bef;

    bool operator==(const FrameRef&) const = default;
};

struct CandidateSet {
    Eigen::MatrixXd features;  // one candidate per row
    std::vector<FrameRef> provenance;
    std::size_t positive = 0;

    std::size_t size() const noexcept { return provenance.size(); }
};

struct PooledClip {
    std::string video_id;
    std::set<std::string> objects;
    features::FrameSequence frames;
};

/// All clips that may contribute negatives, indexed by video id and annotated object.
class FramePool {
public:
    explicit FramePool(std::vector<PooledClip> clips);

    std::size_t size() const noexcept { return clips_.size(); }
    const PooledClip& clip(std::size_t i) const { return clips_.at(i); }
    const std::vector<std::size_t>& clips_of_video(const std::string& video_id) const;
    std::vector<std::size_t> clips_sharing_object(std::size_t clip) const;

private:
    std::vector<PooledClip> clips_;
    std::map<std::string, std::vector<std::size_t>> by_video_;
    std::map<std::string, std::vector<std::size_t>> by_object_;
};

/// Candidate set for one masked [AFT] frame of `target_clip`.
///
/// Negatives come from the whole pool (randomized), clips of the same video (video_based) or
/// clips sharing an annotated object (object_based); the target clip's own BEF/ACT frames are
/// always eligible, its [AFT] frames never are, and no negative may repeat the (video, time)
/// of a target [AFT] frame. Above `cap` negatives a seeded subsample is kept. The positive is
/// inserted at a seeded position. Throws std::runtime_error("degenerate candidate set") when no
/// negative is eligible.
CandidateSet mem_candidates(std::size_t target_clip, std::size_t target_frame, const FramePool& pool,
                            NegSampling strategy, Rng& rng, std::size_t cap);

/// One candidate set per [AFT] frame of the target clip, in frame order.
std::vector<std::pair<std::size_t, CandidateSet>> mem_candidates(std::size_t target_clip, const FramePool& pool,
                                                                 NegSampling strategy, Rng& rng, std::size_t cap);

/// softmax(scores / tau) with max subtraction. Throws std::invalid_argument for tau <= 0 or
/// empty scores.
Eigen::VectorXd nce_softmax(const Eigen::VectorXd& scores, double tau);

/// Probability over candidates of the query: softmax(C q / tau).
Eigen::VectorXd nce_probability(const Eigen::VectorXd& query, const CandidateSet& candidates, double tau);

/// -log p(positive).
double nce_loss(const Eigen::VectorXd& query, const CandidateSet& candidates, double tau);

}  // namespace cae::model
