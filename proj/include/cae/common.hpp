#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cae {

/// Raised when an input file does not conform to its schema. Carries the
/// 1-based line number (0 when not line-oriented) and the offending field.
class SchemaError : public std::runtime_error {
public:
    SchemaError(std::size_t line, std::string field, const std::string& what)
        : std::runtime_error(format(line, field, what)), line_(line), field_(std::move(field)) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    static std::string format(std::size_t line, const std::string& field, const std::string& what);

    std::size_t line_;
    std::string field_;
};

/// Three-valued evidence: a property can be confirmed, refuted, or not established.
enum class Ternary : std::uint8_t { False = 0, True = 1, Unknown = 2 };

std::string_view to_string(Ternary t) noexcept;
Ternary ternary_from_string(std::string_view s);

/// 64-bit FNV-1a. Stable across platforms; used for seed derivation and provenance.
std::uint64_t fnv1a(std::string_view data, std::uint64_t basis = 0xcbf29ce484222325ULL) noexcept;

/// splitmix64 finalizer, used to mix a base seed with a key.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t key) noexcept;

/// Seeded generator with platform-independent bounded draws. std::uniform_*_distribution
/// and std::shuffle are implementation-defined, so we never use them where output is persisted.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n);

    /// Uniform double in [0, 1) built from the top 53 bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller.
    double normal();

    template <class T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    template <class T>
    void shuffle(std::vector<T>& items) {
        shuffle(std::span<T>(items));
    }

private:
    std::mt19937_64 engine_;
};

/// Lowercases ASCII and joins whitespace-separated words with '_'.
std::string normalize_lemma(std::string_view raw);

std::string to_lower_ascii(std::string_view s);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

/// Splits a text file into lines, dropping a trailing empty line and '\r'.
std::vector<std::string> read_lines(const std::string& path);

std::string hex64(std::uint64_t v);

}  // namespace cae
