#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "amdiv/kernels.hpp"
#include "amdiv/model.hpp"
#include "amdiv/volterra.hpp"

namespace amdiv {

enum class BoundaryStatus { Found, Partial, NoBoundary };

const char* to_string(BoundaryStatus s);

struct BoundaryOptions {
    int N = 50;
    bool include_j10 = true;
    bool include_dividend_terms = true;  // cash Lambda terms and proportional impulses
    // A post-dividend node is solved at tau_j + post_lag * h, where the
    // dividend terms are finite, and stored at tau_j.
    double post_lag = 0.5;
    double asymptote_tau = 0.01;
    MarchOptions march;
};

struct BoundaryCurve {
    OptionKind kind = OptionKind::Put;
    TauGrid grid;
    std::vector<double> t, y, sb;
    std::vector<bool> found;
    std::vector<int> iterations;
    std::vector<double> residual;
    BoundaryStatus status = BoundaryStatus::NoBoundary;
    std::string reason;
    int max_iterations = 0;
    double seconds = 0.0;
    std::vector<std::string> diagnostics;

    bool exists() const { return status != BoundaryStatus::NoBoundary; }
    // S_B at calendar time t, linear in tau between nodes. At an ex-date, Side::Pre
    // is the calendar-after value and Side::Post the calendar-before value. Where
    // no boundary exists returns 0 (put) or +inf (call).
    double sb_at(const Model& m, double t, Side side = Side::Pre) const;
    void write_csv(std::ostream& os) const;
};

// Boundary equation at one node; history y[0..k-1] must be solved. Nodes
// without a boundary carry -inf and contribute nothing.
//
// A post-dividend node is solved at the lagged time tau_e twice, with and
// without the new dividend; the stored value is the pre value shifted by the
// difference, so the jump vanishes with the dividend.
class BoundaryEquation {
public:
    BoundaryEquation(const Model& m, const TauGrid& grid, const BoundaryOptions& opt);

    double residual(std::size_t k, double yk, const std::vector<double>& y) const;
    // evaluation time of node k (lagged for post-dividend nodes)
    double eval_tau(std::size_t k) const;
    const EBCoeffs& coeffs(std::size_t k) const { return c_[k]; }
    // root at tau_e of the equation without the dividend at post node k
    double continuation(std::size_t k, const std::vector<double>& y) const;

private:
    double assemble(const std::vector<double>& s, const std::vector<double>& yy, const std::vector<char>& start,
                    const std::vector<EBCoeffs>& c, std::size_t div_below) const;

    const Model& m_;
    OptionKind kind_;
    const TauGrid& grid_;
    BoundaryOptions opt_;
    std::vector<EBCoeffs> c_;
    std::vector<std::size_t> cash_pre_, prop_pre_;  // pre-node index per schedule entry
    mutable std::size_t cache_k_ = 0;
    mutable double cache_ypre_ = 0.0, cache_y0_ = 0.0;
};

// Residual wrappers named after the three equation variants.
double put_residual_nodiv(const Model& m, const TauGrid& g, std::size_t k, double yk, const std::vector<double>& y,
                          const BoundaryOptions& opt = {});
double put_residual_cashdiv(const Model& m, const TauGrid& g, std::size_t k, double yk,
                            const std::vector<double>& y, const BoundaryOptions& opt = {});
double call_residual(const Model& m, const TauGrid& g, std::size_t k, double yk, const std::vector<double>& y,
                     const BoundaryOptions& opt = {});

// S_B from the boundary image y; no boundary (y = -inf) maps to 0 (put) or +inf (call).
double sb_from_y(OptionKind kind, double y, double alpha, double K);

TauGrid boundary_grid(const Model& m, int N);

// Solves for the boundary of m.spec().kind.
BoundaryCurve solve_boundary(const Model& m, const BoundaryOptions& opt = {});

// Short-maturity boundary image y(tau) for constant coefficients frozen at
// t = T. Empty when the leading-order formula does not apply.
std::optional<double> eb_asymptote(double tau, const Model& m, OptionKind kind);

// y(0): the strike image, or the rK/q limit of the boundary at expiry when the
// yield dominates (q > r for the put, r > q for the call).
double terminal_y(const Model& m, OptionKind kind);

// True when the boundary provably does not exist (put with r < 0 throughout;
// call with r > 0 throughout, q = 0 and no discrete dividends).
bool boundary_absent(const Model& m, OptionKind kind, std::string* reason = nullptr);

}  // namespace amdiv
