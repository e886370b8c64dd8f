#include "cae/features.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "cae/common.hpp"

namespace cae::features {

static_assert(std::endian::native == std::endian::little, "CAEF I/O assumes a little-endian host");

std::string_view to_string(Segment s) noexcept {
    switch (s) {
        case Segment::Bef: return "BEF";
        case Segment::Act: return "ACT";
        case Segment::Aft: return "AFT";
    }
    return "BEF";
}

std::vector<double> sample_frame_times(double start_s, double end_s, double pad_s, double stride_s) {
    if (!(end_s > start_s)) throw std::invalid_argument("clip duration must be positive");
    if (!(stride_s > 0.0)) throw std::invalid_argument("stride must be positive");
    const double t0 = std::max(0.0, start_s - pad_s);
    const double stop = end_s + pad_s;
    std::vector<double> times;
    for (std::size_t k = 0;; ++k) {
        const double t = t0 + static_cast<double>(k) * stride_s;
        if (!(t < stop)) break;
        times.push_back(t);
    }
    return times;
}

SegmentSizes segment_clip(std::size_t n) {
    if (n < 3) throw std::invalid_argument("clip too short to segment");
    const std::size_t b1 = n / 3;
    const std::size_t b2 = 2 * n / 3;
    return {b1, b2 - b1, n - b2};
}

std::vector<Segment> segment_labels(std::size_t n) {
    const auto sizes = segment_clip(n);
    std::vector<Segment> labels(n, Segment::Act);
    for (std::size_t i = 0; i < sizes.bef; ++i) labels[i] = Segment::Bef;
    for (std::size_t i = sizes.bef + sizes.act; i < n; ++i) labels[i] = Segment::Aft;
    return labels;
}

std::int64_t time_key(double time_s) noexcept { return std::llround(time_s * 2.0); }

std::vector<float> synth_features(std::string_view video_id, double time_s, std::size_t dim) {
    constexpr int kReach = 4;  // grid cells on either side (4 x 0.5 s)
    const std::uint64_t video_seed = fnv1a(video_id);
    const std::int64_t key = time_key(time_s);

    std::vector<double> acc(dim, 0.0);
    for (int off = -kReach; off <= kReach; ++off) {
        const double w = static_cast<double>(kReach + 1 - std::abs(off));
        const auto cell = static_cast<std::uint64_t>(key + off);
        Rng rng(mix_seed(mix_seed(video_seed, cell), dim));
        for (auto& a : acc) a += w * rng.normal();
    }
    double norm = 0.0;
    for (double a : acc) norm += a * a;
    norm = std::sqrt(norm);
    std::vector<float> out(dim);
    for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(acc[i] / norm);
    return out;
}

void FeatureStore::add(std::string video_id, double time_s, std::span<const float> values) {
    if (values.size() != dim_) throw std::invalid_argument("feature row has wrong dimension");
    auto key = std::make_pair(video_id, time_key(time_s));
    if (lookup_.contains(key)) return;
    lookup_.emplace(std::move(key), index_.size());
    index_.push_back({std::move(video_id), time_s});
    values_.insert(values_.end(), values.begin(), values.end());
}

bool FeatureStore::contains(std::string_view video_id, double time_s) const {
    return lookup_.contains({std::string(video_id), time_key(time_s)});
}

std::vector<float> FeatureStore::frame(std::string_view video_id, double time_s) const {
    auto it = lookup_.find({std::string(video_id), time_key(time_s)});
    if (it == lookup_.end())
        throw std::out_of_range("no feature row for " + std::string(video_id) + " @ " + std::to_string(time_s));
    const auto r = row(it->second);
    return {r.begin(), r.end()};
}

namespace {

template <class T>
void put(std::string& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    template <class T>
    T get() {
        need(sizeof(T));
        T v;
        std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }

    std::string_view take(std::size_t n) {
        need(n);
        auto s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    bool done() const noexcept { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw std::runtime_error("CAEF: truncated file");
    }

    std::string_view bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string FeatureStore::serialize() const {
    std::string out;
    out.reserve(24 + index_.size() * 32 + values_.size() * sizeof(float));
    out.append("CAEF", 4);
    put<std::uint32_t>(out, kVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(dim_));
    put<std::uint64_t>(out, index_.size());
    for (const auto& r : index_) {
        put<std::uint32_t>(out, static_cast<std::uint32_t>(r.video_id.size()));
        out.append(r.video_id);
        put<double>(out, r.time_s);
    }
    for (float v : values_) put<float>(out, v);
    return out;
}

FeatureStore FeatureStore::deserialize(std::string_view bytes) {
    Reader in(bytes);
    if (in.take(4) != "CAEF") throw std::runtime_error("CAEF: bad magic");
    if (const auto version = in.get<std::uint32_t>(); version != kVersion)
        throw std::runtime_error("CAEF: unsupported version " + std::to_string(version));
    FeatureStore store(in.get<std::uint32_t>());
    const auto rows = in.get<std::uint64_t>();
    std::vector<FeatureRow> index;
    for (std::uint64_t i = 0; i < rows; ++i) {
        const auto len = in.get<std::uint32_t>();
        std::string id(in.take(len));
        const double t = in.get<double>();
        index.push_back({std::move(id), t});
    }
    std::vector<float> row(store.dim_);
    for (auto& r : index) {
        for (auto& v : row) v = in.get<float>();
        const auto before = store.rows();
        store.add(std::move(r.video_id), r.time_s, row);
        if (store.rows() == before) throw std::runtime_error("CAEF: duplicate (video, time) row");
    }
    if (!in.done()) throw std::runtime_error("CAEF: trailing bytes");
    return store;
}

void FeatureStore::save(const std::string& path) const { write_file(path, serialize()); }

FeatureStore FeatureStore::load(const std::string& path) { return deserialize(read_file(path)); }

FrameSequence build_frame_sequence(std::string_view video_id, double start_s, double end_s,
                                   const FeatureProvider& provider, const SamplingOptions& opts) {
    FrameSequence seq;
    seq.video_id = std::string(video_id);
    seq.times = sample_frame_times(start_s, end_s, opts.pad_s, opts.stride_s);
    seq.segments = segment_labels(seq.times.size());
    seq.dim = provider.dim();
    seq.features.reserve(seq.times.size() * seq.dim);
    for (double t : seq.times) {
        const auto f = provider.frame(video_id, t);
        seq.features.insert(seq.features.end(), f.begin(), f.end());
    }
    return seq;
}

}  // namespace cae::features
