#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ipp/scenario.hpp"

namespace ipp {

using Complex = std::complex<double>;

/// The fourteen transformed states: the twelve model states plus
/// delta+ = exp(j theta) and delta- = exp(-j theta).
enum MomentState : int {
    kMx = 0,
    kMy,
    kMz,
    kMphi,
    kMtheta,
    kMpsi,
    kMV,
    kMvt,
    kMwt,
    kMpt,
    kMqt,
    kMrt,
    kMdp, ///< delta+
    kMdm, ///< delta-
};

inline constexpr int kMomentStates = 14;

/// Sorted list of transformed-state indices naming a raw moment <s_a s_b ...>.
using MultiIndex = std::vector<int>;

/**
 * @brief Slot table of the retained moments.
 *
 * Slots 0..13 hold the means; the following slots hold the retained pair
 * moments in a fixed order. The table is the same for every scenario.
 */
class MomentLayout {
public:
    static const MomentLayout& instance();

    int size() const { return static_cast<int>(pairs_.size()) + kMomentStates; }
    int mean_slot(int a) const { return a; }
    /// Slot of <s_a s_b>, or -1 if the pair is not retained.
    int pair_slot(int a, int b) const { return table_[a][b]; }
    /// Slot of a retained moment of order 1 or 2, or -1.
    int slot(const MultiIndex& m) const;
    const std::vector<std::pair<int, int>>& pairs() const { return pairs_; }
    /// Column-friendly name, e.g. "x", "dp", "x_dp", "pt_vt".
    std::string name(int slot) const;

    static const char* state_name(int a);

private:
    MomentLayout();

    std::vector<std::pair<int, int>> pairs_;
    int table_[kMomentStates][kMomentStates];
};

/// Retained first and second moments. Values are complex; moments free of
/// delta factors stay real up to rounding.
struct TransformedMoments {
    Eigen::VectorXcd values;
    double V0 = 0.0; ///< mean launch speed

    TransformedMoments() : values(Eigen::VectorXcd::Zero(MomentLayout::instance().size())) {}

    Complex mean(int a) const { return values[a]; }
    /// Retained pair moment; throws std::out_of_range if not retained.
    Complex pair(int a, int b) const;
    /// <s^2> - <s>^2 from the real parts.
    double variance(int a) const;
    /// <s_a s_b> - <s_a><s_b> from the real parts; the pair must be retained.
    double covariance(int a, int b) const;
};

/// How 1/V is closed inside the moment dynamics.
enum class SpeedClosure {
    CurrentMean, ///< 1/<V> at the current instant
    FrozenV0,    ///< 1/V0 throughout
};

struct MomentOptions {
    SpeedClosure speed = SpeedClosure::CurrentMean;
    std::optional<double> step; ///< overrides integration.moment_step
    int record_every = 100;     ///< keep every k-th sample in the series
};

/// Gaussian independent initial moments of the transformed system.
TransformedMoments init_moments(const InitialDistribution& dist, const Scenario& scenario);

/**
 * @brief Value of an arbitrary moment of order <= 3 under mean-field closure.
 *
 * delta+ delta- pairs cancel exactly; retained moments are returned as
 * stored; anything else is split into a retained pair times a mean (pair
 * priority: spin-rate pairs, squares, delta pairs, coordinate pairs) or into
 * a product of means. Throws std::invalid_argument for order > 3.
 */
Complex closure_factorize(const MultiIndex& moment, const TransformedMoments& current);

/// The factors closure_factorize multiplies, each a retained moment.
std::vector<MultiIndex> closure_plan(const MultiIndex& moment);

/// Time derivative of every retained moment. Throws SingularityError naming
/// the 1/cos(theta) term when |<delta+> + <delta->| < 1e-9.
TransformedMoments moment_rhs(const TransformedMoments& mu, const Scenario& scenario,
                              SpeedClosure speed = SpeedClosure::CurrentMean);

/// Predicted impact from the mean ground crossing.
struct MomentImpactPrediction {
    double tau = 0.0;
    double mean_x = 0.0;
    double mean_y = 0.0;
    double sd_x = 0.0;     ///< projected onto the ground plane along the mean velocity
    double sd_y = 0.0;
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    double raw_sd_x = 0.0; ///< sd of x at the crossing instant, no projection
    double raw_sd_y = 0.0;
};

struct MomentSeries {
    std::vector<double> tau;
    std::vector<TransformedMoments> samples;
    std::optional<MomentImpactPrediction> impact;
};

/// Classical RK4 from init_moments until the mean altitude returns to the
/// ground after apogee. Throws HorizonError if that does not happen within
/// integration.max_span.
MomentSeries integrate_moments(const Scenario& scenario, const MomentOptions& options = {});

/// RK4 of the deterministic drift from the mean launch state with the given
/// step, returning the state after every `record_every` steps (the launch
/// state first). `frozen_speed` applies the same 1/V freeze as the moment
/// engine.
std::vector<StateVector> deterministic_reference(const Scenario& scenario, double step,
                                                 std::size_t steps, int record_every,
                                                 std::optional<double> frozen_speed = std::nullopt);

} // namespace ipp
