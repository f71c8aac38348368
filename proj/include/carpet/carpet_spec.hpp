#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace carpet {

/// Ratio log m / log n. When m and n are powers of a common integer the ratio
/// is rational and `num/den` holds it exactly (den > 0); otherwise den == 0.
struct Theta {
    double value = 0.0;
    long num = 0;
    long den = 0;

    bool exact() const { return den > 0; }
};

Theta make_theta(int m, int n);

/// Floor of k*theta, exact whenever theta is rational.
std::size_t ell(std::size_t k, const Theta& theta);

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

struct Cell {
    int i = 0;  // column
    int j = 0;  // row

    friend auto operator<=>(const Cell&, const Cell&) = default;
};

struct Entry {
    int i = 0;
    int j = 0;
    double p = 0.0;
};

/// Unvalidated carpet description as read from a config file.
struct RawCarpet {
    long m = 0;
    long n = 0;
    struct RawEntry {
        long i = 0;
        long j = 0;
        double p = 0.0;
    };
    std::vector<RawEntry> entries;
};

struct IndexSets {
    std::vector<int> gx;                 // occupied columns, ascending
    std::vector<int> gy;                 // occupied rows, ascending
    std::vector<std::vector<int>> gx_row;  // row j -> columns in that row (empty if j not in gy)
    std::vector<double> q;               // row j -> q_j (0 if j not in gy)
    Theta theta;
    bool uniform_fibres = false;
};

constexpr double kProbabilityTolerance = 1e-12;

/// A validated, immutable carpet instance. Construct with validate_spec().
class CarpetSpec {
public:
    int m() const { return m_; }
    int n() const { return n_; }
    std::size_t size() const { return entries_.size(); }

    /// Entries sorted by (j, i).
    std::span<const Entry> entries() const { return entries_; }

    bool contains(int i, int j) const;
    bool has_row(int j) const { return j >= 0 && j < m_ && !idx_.gx_row[j].empty(); }

    double p(int i, int j) const;
    double log_p(int i, int j) const;
    double q(int j) const;
    double log_q(int j) const;
    double max_q() const { return max_q_; }

    const IndexSets& indices() const { return idx_; }
    const Theta& theta() const { return idx_.theta; }
    std::size_t ell(std::size_t k) const { return carpet::ell(k, idx_.theta); }

private:
    friend CarpetSpec validate_spec(const RawCarpet& raw);

    int m_ = 0;
    int n_ = 0;
    std::vector<Entry> entries_;
    std::vector<double> p_table_;   // n*m, row-major by j
    std::vector<double> logp_table_;
    std::vector<double> logq_;
    double max_q_ = 0.0;
    IndexSets idx_;
};

/// Throws CarpetError naming the violated hypothesis.
CarpetSpec validate_spec(const RawCarpet& raw);

IndexSets derive_indices(const CarpetSpec& spec);

/// f_ij(x, y) = ((x + i)/n, (y + j)/m). Throws CellNotInG.
Point2 apply_map(const CarpetSpec& spec, Cell cell, Point2 point);

/// Accepts "0.25", "1/4" or "2.5e-1".
double parse_probability(std::string_view text);

/// Parses {"m":..,"n":..,"entries":[[i,j,p],...]}; p may be a number or a
/// string understood by parse_probability. Malformed input -> ErrorCode::Config.
RawCarpet parse_carpet_json(std::string_view text);
RawCarpet load_carpet_file(const std::string& path);

std::string describe(const CarpetSpec& spec);

}  // namespace carpet
