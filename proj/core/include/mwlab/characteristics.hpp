#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mwlab/geometry.hpp"
#include "mwlab/quadrature.hpp"
#include "mwlab/reducing.hpp"
#include "mwlab/weights.hpp"

namespace mwlab {

struct CubeValue {
    Cube cube;
    double value = 0.0;
    double error = 0.0;
    bool diverged = false;
};

struct CharacteristicReport {
    enum class Kind { Ap, ApInfty, ScalarAInfty, FujiiWilson, Sc };

    Kind kind = Kind::ApInfty;
    double p = 1.0;
    double value = 1.0;  // max over the family; +inf once any cube diverges
    Cube argmax_cube;
    std::vector<CubeValue> per_cube;
    bool diverged = false;
    std::optional<Cube> witness;
    std::string family;
    std::vector<std::string> warnings;
};

std::string to_string(CharacteristicReport::Kind k);

// Per-cube values. Scalar weights take the separable route w(x)/w(y); matrix weights use node-pair products.
CubeValue ap_cube(const WeightSpec& w, double p, const Cube& q, const QuadratureConfig& cfg);
CubeValue apinf_cube(const WeightSpec& w, double p, const Cube& q, const QuadratureConfig& cfg);
// (avg_Q w) exp(avg_Q log w^{-1}) for a scalar weight.
CubeValue scalar_ainfty_cube(const WeightSpec& w, const Cube& q, const QuadratureConfig& cfg);

CharacteristicReport ap_characteristic(const WeightSpec& w, double p, const ProbeFamily& family,
                                       const QuadratureConfig& cfg);
CharacteristicReport apinf_characteristic(const WeightSpec& w, double p, const ProbeFamily& family,
                                          const QuadratureConfig& cfg);
CharacteristicReport scalar_ainfty_characteristic(const WeightSpec& w, const ProbeFamily& family,
                                                  const QuadratureConfig& cfg);

// Fujii-Wilson constant of a scalar function given through log f. The maximal function runs over grid-aligned
// sub-cubes of Q at resolution 2^-grid_depth; a coarser pass one level up reports stability.
struct FujiiWilsonValue {
    double value = 1.0;
    double coarse = 1.0;
    bool stable = true;
};
FujiiWilsonValue fujii_wilson_cube(const ScalarField& logf, const Cube& q, const QuadratureConfig& cfg, int grid_depth);
int default_grid_depth(int n);
// Balls versus cubes: M_ball <= factor * M_cube.
double ball_cube_factor(int n);

CharacteristicReport scalar_fujii_wilson(const WeightSpec& w, const ProbeFamily& family, int grid_depth,
                                         const QuadratureConfig& cfg);

struct ScReport {
    CharacteristicReport matrix;  // sup over sampled M of [w_M]*
    double vector_value = 1.0;    // sup over sampled z of [w_z]*
    std::vector<double> per_matrix;
    std::vector<double> per_vector;
};
ScReport sc_characteristic(const WeightSpec& w, double p, const ProbeFamily& family, int matrix_samples,
                           int vector_samples, const QuadratureConfig& cfg, int grid_depth = 0,
                           std::uint64_t seed = 0x5c);

// Seeded sample of nonzero test matrices: identity first, then rank-one matrices, then Gaussian matrices.
std::vector<Mat> sample_matrices(int m, int count, bool complex_entries, std::uint64_t seed);

struct ConditionValue {
    std::string name;
    double constant = 1.0;
    bool diverged = false;
};

// Conditions (ii)-(viii) of the eight-way equivalence on one cube; (i) is identified with (ii).
struct EquivalenceReport {
    Cube cube;
    double p = 1.0;
    std::array<ConditionValue, 7> conditions;
    double cross_ratio = 1.0;
    bool finite = true;
};
EquivalenceReport compare_conditions(const WeightSpec& w, double p, const Cube& q, const QuadratureConfig& cfg,
                                     int samples = 16, std::uint64_t seed = 0xc0);

using MatrixField = std::function<Mat(const Point&)>;

struct FunctionalCandidate {
    std::string name;
    MatrixField h;
};

struct FunctionalValue {
    std::string name;
    double value = 0.0;
    bool excluded = false;
    std::string note;
};

struct FunctionalReport {
    std::vector<FunctionalValue> candidates;
    double value = 0.0;
    double apinf_value = 0.0;
};

// Built-in candidates: W^{-1/p}, A_Q^{-1}, and the two-level mixture with threshold e^M on |A_Q W^{-1/p}|^p.
std::vector<FunctionalCandidate> builtin_candidates(const WeightSpec& w, const ReducingOperator& a,
                                                    std::vector<double> thresholds);
FunctionalReport functional_characteristic(const WeightSpec& w, double p, const Cube& q,
                                           const std::vector<FunctionalCandidate>& candidates,
                                           const QuadratureConfig& cfg);

struct DistributionalRow {
    double m = 0.0;
    double fraction = 0.0;
    double bound = 0.0;
    double ratio = 0.0;  // fraction * M / log(C [W])
    bool pass = true;
};
struct DistributionalReport {
    std::vector<DistributionalRow> rows;
    double decay_slope = 0.0;
    bool pass = true;
};
DistributionalReport distributional_check(const WeightSpec& w, double p, const Cube& q,
                                          const std::vector<double>& m_values, double apinf_value, double c,
                                          const QuadratureConfig& cfg);

struct StoppingReport {
    double m = 0.0;
    std::vector<Cube> selected;
    double ratio = 0.0;
    double bound = 0.0;
    bool pass = true;
    int failed_branches = 0;
};
StoppingReport stopping_time_check(const WeightSpec& w, double p, const Cube& q, double m, int max_depth,
                                   double apinf_value, double c, const QuadratureConfig& cfg);

struct IntegrabilityReport {
    std::vector<double> u_grid;
    std::vector<double> sup_all;     // sup over the family
    std::vector<double> sup_coarse;  // sup over cubes above the finest level
    std::vector<bool> stable;
    double u_star = 0.0;
};
IntegrabilityReport integrability_exponent(const WeightSpec& w, double p, const ProbeFamily& family,
                                           const std::vector<double>& u_grid, const QuadratureConfig& cfg);

struct InclusionReport {
    double apinf_p = 1.0;
    double apinf_q = 1.0;
    double constant_pq = 1.0;       // apinf_q / apinf_p
    std::optional<double> ap_p;     // A_p characteristic (absent when divergent)
    bool ap_p_diverged = false;
    bool ap_dominates = true;       // apinf_p <= ap_p (1 + tol) when p <= 1
    double union_q = 0.0;           // q = 1 + 1/u*
    bool union_finite = false;
    double u_star = 0.0;
};
InclusionReport inclusion_checks(const WeightSpec& w, double p, double q, const ProbeFamily& family,
                                 const QuadratureConfig& cfg);

struct ReverseHolderCase {
    Cube cube;
    int matrix_index = 0;
    double r = 1.0;
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = true;
};
struct ReverseHolderReport {
    double sc = 1.0;
    double r_max = 1.0;
    std::vector<ReverseHolderCase> cases;
    double cor8_sup = 0.0;          // sup_Q (avg |W^{1/p} A_Q^{-1}|^{pr})^{1/r} at r_max
    double cor8_maximal_sup = 0.0;  // dyadic maximal variant
    bool pass = true;
    bool diverged = false;
};
ReverseHolderReport reverse_holder_check(const WeightSpec& w, double p, int matrix_samples, const ProbeFamily& family,
                                         int case_limit, const QuadratureConfig& cfg, double sc_value,
                                         int maximal_depth = 4, std::uint64_t seed = 0x4e);

struct MultiplierReport {
    std::vector<double> depth_ratio;  // max ratio over trials using levels 0..d, d = 0..levels
    double max_ratio = 0.0;
    double depth_slope = 0.0;  // slope of log ratio against log 2^d
};
// q_exp = +inf selects the sup norm over levels.
MultiplierReport multiplier_bound_check(const WeightSpec& w, double p, double q_exp, int levels, int trials,
                                        const QuadratureConfig& cfg, std::uint64_t seed = 0x46);

struct DualReport {
    double ap = 0.0;
    double dual_ap_pow = 0.0;  // [W^{-p'/p}]_{A_{p'}}^{p/p'}
    double ratio = 0.0;
    bool diverged = false;
    std::vector<double> inverse_ratios;  // |A_Q^{-1} M| / (avg |W^{-1/p} M|^{p'})^{1/p'}
};
DualReport dual_weight_check(const WeightSpec& w, double p, const ProbeFamily& family, const QuadratureConfig& cfg,
                             int matrix_samples = 8, std::uint64_t seed = 0xd0);

}  // namespace mwlab
