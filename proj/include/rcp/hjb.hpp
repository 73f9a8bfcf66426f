#ifndef RCP_HJB_HPP
#define RCP_HJB_HPP

#include <array>
#include <memory>
#include <span>

#include "rcp/market_model.hpp"
#include "rcp/pde.hpp"
#include "rcp/policy.hpp"

namespace rcp {

// Post-default HJB coefficient fields at (t, p_tilde); valid for any N.
struct PostCoefficients {
    std::vector<double> alpha;  // N-1 entries
    std::vector<double> phi;    // N-1 entries
    double psi = 0.0;
};
PostCoefficients post_coefficients(const MarketModel& model, double t,
                                   std::span<const double> p_tilde);

// Pre-default HJB coefficient fields at (t, p_tilde).
struct PreCoefficients {
    std::vector<double> alpha;        // (N-1) x 2, row-major
    std::vector<double> phi;          // N-1
    double psi = 0.0;
    std::array<double, 2> upsilon{};  // (r - mu_tilde, r - a_tilde)
};
PreCoefficients pre_coefficients(const MarketModel& model, double t,
                                 std::span<const double> p_tilde);

// Solved post-default problem on the two-regime grid: the transformed linear
// surface, its log back-transform, and the extracted feedback policy.
struct PostDefaultProblem {
    Grid1D grid;
    ValueSurface psi;        // Hopf-Cole variable, strictly positive
    ValueSurface w;          // value function, w = (1-gamma) log psi
    ValueSurface policy_piS; // feedback stock fraction on the same grid

    double policy_at(double t, double p) const { return policy_piS.interpolate(t, p); }
};

struct PreDefaultProblem {
    Grid1D grid;
    ValueSurface psi;
    ValueSurface w;
    ValueSurface policy_piS;
    ValueSurface policy_piP;

    PolicyValue policy_at(double t, double p) const {
        return {policy_piS.interpolate(t, p), policy_piP.interpolate(t, p)};
    }
};

// Solves the linear transformed post-default equation and back-transforms.
// Requires N == 2; general N goes through feynman_kac_estimate.
PostDefaultProblem solve_post(const MarketModel& model, const Grid1D& grid,
                              const SolveScheme& scheme = {});

// Optimal post-default stock fraction at (t, p).
double post_policy(const PostDefaultProblem& post, double t, double p);

// Filter image of the default jump for N == 2: p h_1 / h_tilde(p), always in [0,1].
double default_jump_argument(const MarketModel& model, double p);

// Solves the semilinear transformed pre-default equation; the coupling term
// evaluates the post-default surface at the jumped filter point.
PreDefaultProblem solve_pre(const MarketModel& model, const PostDefaultProblem& post,
                            const Grid1D& grid, const SolveScheme& scheme = {});

// Optimal pre-default pair at (t, p); z == 1 delegates to the post-default
// policy with pi^P = 0.
PolicyValue pre_policy(const PreDefaultProblem& pre, const PostDefaultProblem& post,
                       double t, double p, int z);

// Value of the verification-theorem R-function at grid node (k, j) for an
// arbitrary policy, using finite-difference derivatives of the solved
// surfaces. Zero at the optimizer up to discretization error, negative away
// from it. Interior nodes only (1 <= k <= nt-1, 1 <= j <= np-2).
double hjb_residual(const MarketModel& model, const PostDefaultProblem& post,
                    const PreDefaultProblem* pre, int z, int k, int j, const PolicyValue& pi);

// Feedback policy backed by the solved surfaces (N == 2).
class SolvedPolicy : public Policy {
public:
    SolvedPolicy(std::shared_ptr<const PostDefaultProblem> post,
                 std::shared_ptr<const PreDefaultProblem> pre)
        : post_(std::move(post)), pre_(std::move(pre)) {}
    PolicyValue value(double t, std::span<const double> p_tilde, int z) const override;

private:
    std::shared_ptr<const PostDefaultProblem> post_;
    std::shared_ptr<const PreDefaultProblem> pre_;
};

// Post-default coefficient bundle in the form consumed by feynman_kac_estimate.
SimplexDiffusionCoefficients post_fk_coefficients(const MarketModel& model);

} // namespace rcp

#endif
