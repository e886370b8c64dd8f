#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cae::features {

enum class Segment : std::uint8_t { Bef = 0, Act = 1, Aft = 2 };

std::string_view to_string(Segment s) noexcept;

/// Frame times every `stride_s` from max(0, start - pad) while below end + pad.
/// Throws std::invalid_argument if end_s <= start_s or stride_s <= 0.
std::vector<double> sample_frame_times(double start_s, double end_s, double pad_s = 3.0, double stride_s = 2.0);

struct SegmentSizes {
    std::size_t bef = 0;
    std::size_t act = 0;
    std::size_t aft = 0;

    bool operator==(const SegmentSizes&) const = default;
};

/// Near-equal thirds with boundaries at floor(n/3) and floor(2n/3).
/// Throws std::invalid_argument("clip too short to segment") for n < 3.
SegmentSizes segment_clip(std::size_t n_frames);

std::vector<Segment> segment_labels(std::size_t n_frames);

/// Half-second grid index used as the time key of a frame.
std::int64_t time_key(double time_s) noexcept;

/// Deterministic unit-norm pseudo-random frame feature. Nearby times of one video share
/// underlying grid vectors (triangular blend over +-2 s), so adjacent frames correlate.
std::vector<float> synth_features(std::string_view video_id, double time_s, std::size_t dim);

/// Anything that can hand out a frame feature by (video, time).
class FeatureProvider {
public:
    virtual ~FeatureProvider() = default;
    virtual std::size_t dim() const = 0;
    /// Throws std::out_of_range when the frame is unknown.
    virtual std::vector<float> frame(std::string_view video_id, double time_s) const = 0;
};

class SyntheticFeatures final : public FeatureProvider {
public:
    explicit SyntheticFeatures(std::size_t dim) : dim_(dim) {}
    std::size_t dim() const override { return dim_; }
    std::vector<float> frame(std::string_view video_id, double time_s) const override {
        return synth_features(video_id, time_s, dim_);
    }

private:
    std::size_t dim_;
};

struct FeatureRow {
    std::string video_id;
    double time_s = 0.0;
};

/// In-memory feature table; the contents of a "CAEF" file.
///
/// Layout (all little-endian): "CAEF", u32 version (=1), u32 dim, u64 rows,
/// rows x {u32 byte length, UTF-8 video id, f64 time}, then rows x dim f32 values.
class FeatureStore final : public FeatureProvider {
public:
    static constexpr std::uint32_t kVersion = 1;

    explicit FeatureStore(std::size_t dim) : dim_(dim) {}

    std::size_t dim() const override { return dim_; }
    std::size_t rows() const noexcept { return index_.size(); }
    const std::vector<FeatureRow>& index() const noexcept { return index_; }
    std::span<const float> row(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }

    /// Appends a row; a (video, time key) pair already present is ignored.
    void add(std::string video_id, double time_s, std::span<const float> values);
    bool contains(std::string_view video_id, double time_s) const;

    std::vector<float> frame(std::string_view video_id, double time_s) const override;

    std::string serialize() const;
    static FeatureStore deserialize(std::string_view bytes);

    void save(const std::string& path) const;
    static FeatureStore load(const std::string& path);

private:
    std::size_t dim_;
    std::vector<FeatureRow> index_;
    std::vector<float> values_;
    std::map<std::pair<std::string, std::int64_t>, std::size_t> lookup_;
};

/// Sampled, segmented and featurized frames of one clip.
struct FrameSequence {
    std::string video_id;
    std::vector<double> times;
    std::vector<Segment> segments;
    std::size_t dim = 0;
    std::vector<float> features;  // times.size() x dim, row-major

    std::size_t size() const noexcept { return times.size(); }
    std::span<const float> row(std::size_t i) const { return {features.data() + i * dim, dim}; }
};

struct SamplingOptions {
    double pad_s = 3.0;
    double stride_s = 2.0;
};

/// The padded window is segmented as a whole, so padding frames land in BEF and AFT.
FrameSequence build_frame_sequence(std::string_view video_id, double start_s, double end_s,
                                   const FeatureProvider& provider, const SamplingOptions& opts = {});

}  // namespace cae::features
