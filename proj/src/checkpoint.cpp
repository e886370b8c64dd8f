#include "cae/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <stdexcept>

#include <json.hpp>

#include "cae/common.hpp"

namespace cae::model {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'C', 'A', 'E', 'M'};

template <class T>
void put(std::string& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

void put_string(std::string& out, std::string_view s) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.append(s);
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

    std::string get_string() {
        const auto n = get<std::uint32_t>();
        need(n);
        std::string s(bytes_.substr(pos_, n));
        pos_ += n;
        return s;
    }

    bool done() const noexcept { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw std::runtime_error("truncated checkpoint");
    }

    std::string_view bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const ModelState& state) {
    std::string out(kMagic, 4);
    put<std::uint32_t>(out, kCheckpointVersion);
    put<std::uint64_t>(out, state.step);
    nlohmann::json cfg = state.config;
    put_string(out, cfg.dump());
    put<std::uint32_t>(out, static_cast<std::uint32_t>(state.vocab.size()));
    for (const auto& t : state.vocab.tokens()) put_string(out, t);

    std::uint32_t n = 0;
    visit_tensors(state.weights, [&](const std::string&, const Mat&, bool) { ++n; });
    put<std::uint32_t>(out, n);
    visit_tensors(state.weights, [&](const std::string& name, const Mat& m, bool) {
        put_string(out, name);
        put<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
        put<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) put<float>(out, static_cast<float>(m(i, j)));
    });
    return out;
}

ModelState deserialize_checkpoint(std::string_view bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw std::runtime_error("not a CAEM checkpoint");
    Reader r(bytes.substr(4));
    const auto version = r.get<std::uint32_t>();
    if (version != kCheckpointVersion)
        throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
    ModelState s;
    s.step = r.get<std::uint64_t>();
    s.config = nlohmann::json::parse(r.get_string()).get<ModelConfig>();
    s.config.validate();
    std::vector<std::string> tokens(r.get<std::uint32_t>());
    for (auto& t : tokens) t = r.get_string();
    s.vocab = Vocab::from_tokens(std::move(tokens));
    if (s.vocab.size() != s.config.vocab_size) throw std::runtime_error("checkpoint vocabulary does not match config");

    s.weights = init_weights(s.config, 0);
    std::uint32_t expected = 0;
    visit_tensors(s.weights, [&](const std::string&, const Mat&, bool) { ++expected; });
    if (r.get<std::uint32_t>() != expected) throw std::runtime_error("checkpoint tensor count does not match config");
    visit_tensors(s.weights, [&](const std::string& name, Mat& m, bool) {
        const auto got = r.get_string();
        if (got != name) throw std::runtime_error("checkpoint tensor '" + got + "' where '" + name + "' was expected");
        const auto rows = r.get<std::uint32_t>();
        const auto cols = r.get<std::uint32_t>();
        if (rows != m.rows() || cols != m.cols()) throw std::runtime_error("shape mismatch for tensor " + name);
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = static_cast<double>(r.get<float>());
    });
    if (!r.done()) throw std::runtime_error("trailing bytes after checkpoint tensors");
    return s;
}

void save_checkpoint(const ModelState& state, const std::string& path) {
    write_file(path, serialize_checkpoint(state));
    nlohmann::json side;
    side["format"] = "CAEM";
    side["version"] = kCheckpointVersion;
    side["step"] = state.step;
    side["config"] = state.config;
    side["vocab_size"] = state.vocab.size();
    side["parameters"] = state.weights.parameter_count();
    write_file(path + ".json", side.dump(2) + "\n");
}

ModelState load_checkpoint(const std::string& path) { return deserialize_checkpoint(read_file(path)); }

}  // namespace cae::model
