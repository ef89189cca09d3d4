#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace amdiv {

enum class NodeKind { Regular, CashPre, CashPost, PropPre, PropPost };

inline bool is_post(NodeKind k) { return k == NodeKind::CashPost || k == NodeKind::PropPost; }
inline bool is_pre(NodeKind k) { return k == NodeKind::CashPre || k == NodeKind::PropPre; }

// A dividend image to be placed on the grid.
struct GridEvent {
    double tau;
    bool cash;     // false: proportional
    int index;     // position in the model's schedule
};

// tau-grid: uniform spacing except that each dividend image is an exact node,
// represented twice (pre/post) at the same tau.
class TauGrid {
public:
    TauGrid() = default;
    // The nearest uniform node is moved onto each image; when that node is an
    // endpoint or already taken, a node is inserted instead.
    static TauGrid build(double tau_max, int N, std::vector<GridEvent> events);

    std::size_t size() const { return tau_.size(); }
    double tau(std::size_t k) const { return tau_[k]; }
    const std::vector<double>& taus() const { return tau_; }
    NodeKind kind(std::size_t k) const { return kind_[k]; }
    int event(std::size_t k) const { return event_[k]; }  // schedule index, -1 for regular nodes
    double h() const { return h_; }
    int N() const { return N_; }
    // first node of the smooth segment containing k
    std::size_t segment_start(std::size_t k) const;
    int cash_events() const;
    int prop_events() const;
    // largest displacement of a moved uniform node
    double max_move() const { return max_move_; }

private:
    std::vector<double> tau_;
    std::vector<NodeKind> kind_;
    std::vector<int> event_;
    double h_ = 0.0;
    int N_ = 0;
    double max_move_ = 0.0;
};

// int_{s_0}^{s_n} G(s) / sqrt(pi (s_n - s)) ds for G sampled on s (duplicate
// abscissae mark a discontinuity). G(s_n) and the linear term G'(s_n)(s - s_n)
// are subtracted and integrated analytically; the remainder uses the trapezoid
// rule. The slope is a one-sided difference inside the last smooth segment.
double weak_sum(std::span<const double> s, std::span<const double> G);

// Plain trapezoid of F(s)/sqrt(pi (s_n - s)) with the finite endpoint limit supplied.
double regular_weak_sum(std::span<const double> s, std::span<const double> F, double end_limit);

// Evaluates int_0^{tau_k} g(s) e^{-(y(tau_k) - y(s))^2 / (4 (tau_k - s))} / sqrt(pi (tau_k - s)) ds
// with g and y tabulated on grid nodes 0..k.
double weak_quad(const TauGrid& grid, std::size_t k, std::span<const double> g, std::span<const double> y);

struct MarchOptions {
    double tol = 1e-8;          // residual tolerance
    double first_step = 0.01;   // initial bracket width on each side of the guess
    double max_below = 10.0;    // bracket expansion limits relative to the guess
    double max_above = 2.0;
    int max_iterations = 100;
};

struct MarchResult {
    std::vector<double> y;       // -inf at nodes without a root
    std::vector<bool> found;
    std::vector<int> iterations;
    std::vector<double> residual;
    int max_iterations = 0;
};

// R(k, y_k, y) with y[0..k-1] solved; may read y[k+1..] never.
using NodeResidual = std::function<double(std::size_t k, double yk, const std::vector<double>& y)>;

// Sequential bracketed root solve at nodes 1..n-1, node 0 fixed at y0. The
// previous finite value is the initial guess.
MarchResult march_and_solve(std::size_t n_nodes, const NodeResidual& R, double y0, const MarchOptions& opt = {});

}  // namespace amdiv
