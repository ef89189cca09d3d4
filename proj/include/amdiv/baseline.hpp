#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "amdiv/boundary.hpp"
#include "amdiv/model.hpp"

namespace amdiv {

enum class DividendHandling {
    LumpSum,        // exact cash drop at the ex-layer, value interpolated across the lattice
    Shift,          // lattice on spot minus the present value of remaining cash dividends
    ContinuousOnly  // discrete dividends ignored
};

const char* to_string(DividendHandling h);

// CRR tree with time-averaged r, q, sigma. Proportional dividends scale the
// lattice exactly in both cash treatments.
struct TreeSpec {
    int n_time = 3000;
    DividendHandling handling = DividendHandling::Shift;
    bool american = true;
};

struct TreeAverages {
    double r, q, sigma;
};

TreeAverages tree_averages(const Model& m);

struct TreeBoundary {
    OptionKind kind = OptionKind::Put;
    std::vector<double> t, sb;  // NaN on layers without exercise
    bool exists = false;

    // linear interpolation between layers; NaN where either neighbour is NaN
    double sb_at(double t) const;
    void write_csv(std::ostream& os, const Model& m) const;
};

struct TreeResult {
    double price = 0.0;
    TreeBoundary boundary;
    std::vector<std::string> warnings;
};

TreeResult tree_solve(const Model& m, const TreeSpec& ts);
double tree_price(const Model& m, const TreeSpec& ts);
TreeBoundary tree_boundary(const Model& m, const TreeSpec& ts);

// |S_B,GIT - S_B,tree| / K at the regular solver nodes, skipping the `exclude_final`
// nodes nearest expiry and nodes where the tree has no boundary value.
struct BoundaryComparison {
    double max_dev = 0.0, mean_dev = 0.0;
    int compared = 0;
    int skipped_dividend = 0;   // pre/post dividend nodes
    int skipped_undefined = 0;  // tree layer without an exercise node
    std::vector<double> t, sb_git, sb_tree;  // every solver node, expiry first
};

BoundaryComparison compare_boundaries(const BoundaryCurve& git, const TreeBoundary& tree, double K,
                                      int exclude_final = 3);

}  // namespace amdiv
