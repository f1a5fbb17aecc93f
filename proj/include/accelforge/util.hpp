#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <initializer_list>
#include <string>
#include <vector>

namespace accelforge {

// ---------------------------------------------------------------------------
// Deterministic seeding and portable sampling.
//
// All stochastic behavior in the system is keyed off explicit 64-bit seeds
// derived with seed_mix, never off shared mutable generators, so that
// fan-out order and thread scheduling cannot change results and a resumed
// campaign replays the exact seeds of an uninterrupted one.
// ---------------------------------------------------------------------------

std::uint64_t splitmix64(std::uint64_t& state);

// Hash-combines a seed with a sequence of values. Stable across platforms.
std::uint64_t seed_mix(std::initializer_list<std::uint64_t> parts);

// Small counter-based generator. std::mt19937_64 would also do, but the
// standard distributions are implementation-defined, so we keep our own
// bounded sampling to guarantee byte-identical traces everywhere.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    // Uniform in [0, n). n must be > 0. Rejection sampling, no modulo bias.
    std::uint64_t below(std::uint64_t n);

    // Uniform double in [lo, hi).
    double uniform(double lo, double hi);

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    std::uint64_t state_;
};

// ---------------------------------------------------------------------------
// Content addressing.
// ---------------------------------------------------------------------------

// Hex SHA-256 of `data`, truncated to `hex_chars` characters.
std::string sha256_hex(const std::string& data, std::size_t hex_chars = 16);

// ---------------------------------------------------------------------------
// Strings.
// ---------------------------------------------------------------------------

std::vector<std::string> split_lines(const std::string& text);
std::string trim(const std::string& s);
bool starts_with(const std::string& s, const std::string& prefix);

// Formats a double with the shortest representation that round-trips.
std::string format_double(double v);

// ---------------------------------------------------------------------------
// Files.
// ---------------------------------------------------------------------------

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

// Write to a sibling temp file, then rename into place. The rename is the
// commit point: readers never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// ---------------------------------------------------------------------------
// Bounded fan-out.
// ---------------------------------------------------------------------------

// Runs fn(i) for i in [0, n) on up to max_parallel threads. Results are
// slotted by index, so assembly order is deterministic regardless of
// scheduling. The first exception, if any, is rethrown after all workers
// finish.
void parallel_for(std::size_t n, std::size_t max_parallel,
                  const std::function<void(std::size_t)>& fn);

}  // namespace accelforge
