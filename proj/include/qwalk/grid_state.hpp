#pragma once

// Finitely supported states u : Z -> C^2 with the norms and inner product used
// throughout the toolkit.

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qwalk {

using Complex = std::complex<double>;

/// Amplitude pair (u1(x), u2(x)) at one lattice site.
struct Spinor {
    Complex c1{};
    Complex c2{};

    double norm_sq() const { return std::norm(c1) + std::norm(c2); }
    bool is_zero() const { return c1 == Complex{} && c2 == Complex{}; }
    friend bool operator==(const Spinor&, const Spinor&) = default;
};

/// Immutable finite-support state. Sites outside [lo(), hi()] are zero; the
/// first and last stored cells are nonzero unless the state is empty.
class GridState {
public:
    GridState() = default;
    GridState(std::int64_t offset, std::vector<Spinor> cells);

    /// e_j at site x, zero elsewhere.
    static GridState delta(int component, std::int64_t site, Complex amplitude = 1.0);

    std::int64_t lo() const { return offset_; }
    std::int64_t hi() const { return offset_ + static_cast<std::int64_t>(cells_.size()) - 1; }
    std::size_t size() const { return cells_.size(); }
    bool empty() const { return cells_.empty(); }
    std::span<const Spinor> cells() const { return cells_; }

    Spinor at(std::int64_t x) const;

    /// Drops leading/trailing cells with site norm <= eps. Lossy for eps > 0.
    GridState trimmed(double eps) const;

    friend bool operator==(const GridState&, const GridState&) = default;

private:
    std::int64_t offset_ = 0;
    std::vector<Spinor> cells_;
};

/// amplitude * e^{i k x} e^{-(x-c)^2 / (2 w^2)} * polarization on the sites
/// where the envelope exceeds `cutoff`.
GridState gaussian_wavepacket(double center, double width, double momentum, Spinor polarization,
                              double cutoff = 1e-18);

class NormKind {
public:
    enum class Tag { lp, weak_lp };

    static NormKind lp(double p);
    static NormKind linf();
    static NormKind weak_lp(double p);
    /// Parses names like "l1", "l2", "l5", "linf", "weak_l4".
    static NormKind parse(std::string_view name);

    Tag tag() const { return tag_; }
    double p() const { return p_; }
    bool is_inf() const;
    std::string name() const;

private:
    NormKind(Tag tag, double p) : tag_(tag), p_(p) {}
    Tag tag_;
    double p_;
};

double norm(const GridState& u, const NormKind& kind);
inline double l1_norm(const GridState& u) { return norm(u, NormKind::lp(1)); }
inline double l2_norm(const GridState& u) { return norm(u, NormKind::lp(2)); }
inline double linf_norm(const GridState& u) { return norm(u, NormKind::linf()); }

/// Site magnitudes ||u(x)||_{C^2} over the stored window.
std::vector<double> site_magnitudes(const GridState& u);

/// sum_x f1 conj(g1) + f2 conj(g2): linear in f, conjugate-linear in g.
Complex inner(const GridState& f, const GridState& g);

/// alpha * u + v over the union of supports, re-trimmed.
GridState axpy(Complex alpha, const GridState& u, const GridState& v);
GridState scale(Complex alpha, const GridState& u);
GridState add(const GridState& u, const GridState& v);
GridState sub(const GridState& u, const GridState& v);

/// e^{i phase} u, useful for gauge checks.
GridState rotate_phase(const GridState& u, double phase);

} // namespace qwalk
