#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tabx::util {

// ---- text helpers ----------------------------------------------------------

std::string trim(std::string_view s);
std::string collapse_whitespace(std::string_view s);
std::string to_lower(std::string_view s);

// trim + collapse internal runs + ASCII case fold. This is the comparison
// form used everywhere; raw cell text stays untouched.
std::string normalize_text(std::string_view s);

bool is_valid_utf8(std::string_view s);

std::vector<std::string> tokenize(std::string_view s);

std::size_t lcs_length(std::string_view a, std::string_view b);

// LCS length over max length, in [0,1]. Empty vs empty is 1.
double lcs_ratio(std::string_view a, std::string_view b);

// Jaccard similarity of the two token sets. Empty vs empty is 1.
double token_jaccard(std::string_view a, std::string_view b);

std::string format_double(double v);  // shortest round-trip decimal form
std::optional<double> parse_double(std::string_view s);

// ---- decimal-faithful product ----------------------------------------------

// Multiplies two doubles through their shortest decimal forms, so products of
// short decimals come out as the nearest double to the decimal result
// (0.9 * 0.4 == 0.36 exactly). Falls back to plain multiplication when the
// digit budget is exceeded.
double decimal_mul(double a, double b);

// ---- hashing ----------------------------------------------------------------

std::string sha256_hex(std::string_view data);

// ---- file IO ------------------------------------------------------------------

std::string read_file(const std::string& path);

// Writes to a sibling temp file then renames over the target, so readers never
// observe a half-written file.
void write_file_atomic(const std::string& path, std::string_view data);

// ---- deterministic RNG ------------------------------------------------------

// Counter-based splitmix64. All sampling goes through the methods below so the
// byte stream is identical across platforms and compilers.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64();
    // uniform in [0, n), n > 0
    std::uint64_t below(std::uint64_t n);
    double unit_real();  // [0, 1)

    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v[static_cast<std::size_t>(below(v.size()))];
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        if (v.size() < 2) return;
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            std::size_t j = static_cast<std::size_t>(below(i + 1));
            std::swap(v[i], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

// Stable child-seed derivation: hash(master, table id, case index).
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::uint64_t index);

}  // namespace tabx::util
