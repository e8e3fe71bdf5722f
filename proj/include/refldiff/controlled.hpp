#pragma once

#include <cstdint>
#include <vector>

#include "refldiff/coefficients.hpp"
#include "refldiff/common.hpp"
#include "refldiff/geometry.hpp"
#include "refldiff/rng.hpp"

namespace refldiff {

enum class BehaviorKind { ObliqueReflection, NonlocalJump };
enum class NonlocalKernelKind { FixedPoint, UniformSet };

struct BoundaryBehavior {
    BehaviorKind kind = BehaviorKind::ObliqueReflection;
    double delta = 0.0;  // 0 -> use Numerics::delta
    NonlocalKernelKind kernel = NonlocalKernelKind::FixedPoint;
    Vecd target;
    std::vector<Vecd> points;

    static BoundaryBehavior oblique(double delta = 0.0) {
        BoundaryBehavior b;
        b.kind = BehaviorKind::ObliqueReflection;
        b.delta = delta;
        return b;
    }
};

struct Numerics {
    double dt = 1e-3;
    double delta = 0.0;        // 0 -> 1e-2 * sqrt(dt)
    double t_trunc = 20.0;
    double out_dt = 0.0;       // constrained-path sampling grid; 0 -> dt
    double clamp = 4.0;        // Gaussian clamp (per component)
    double kappa = 0.55;       // allowed exterior excursion, in units of delta
    bool steepest_descent_faces = false;  // replace the first-index rule
    std::uint64_t max_reflections_per_block = 10'000'000;

    double effective_delta() const { return delta > 0 ? delta : 1e-2 * std::sqrt(dt); }
    void validate() const;
};

struct StopRule {
    enum Kind { Lambda0Target, SBudget } kind = Lambda0Target;
    double value = 1.0;
    static StopRule lambda0(double t) { return {Lambda0Target, t}; }
    static StopRule budget(double s) { return {SBudget, s}; }
};

enum class StepKind { Diffusion, Reflection, Nonlocal };

struct PathRecord {
    double s = 0.0;
    double lam0 = 0.0;  // interior clock
    double lam1 = 0.0;  // boundary clock
    Vecd y;
    StepKind kind = StepKind::Diffusion;
    int face = -1;
    double dt = 0.0;  // clock increment of this event
};

struct BoundaryAtom {
    double s = 0.0;
    Vecd x;      // pre-step state
    Vecd u;      // unit push direction (zero for nonlocal)
    double mass = 0.0;
    int face = -1;  // -1 for nonlocal
};

struct ControlledPath {
    int dim = 0;
    std::vector<PathRecord> records;  // records[0] = initial state
    std::vector<BoundaryAtom> atoms;
    // Brownian increments per diffusion record, kept when requested
    bool has_increments = false;
    std::vector<double> increment_dt;
    std::vector<Vecd> increments;

    std::uint64_t seed = 0;
    std::uint64_t path_index = 0;
    double dt = 0.0;
    double delta = 0.0;

    double terminal_s() const { return records.back().s; }
    double terminal_lam0() const { return records.back().lam0; }
    double terminal_lam1() const { return records.back().lam1; }
    const Vecd& terminal_y() const { return records.back().y; }

    /// max over records of |lam0 + lam1 - s| / max(1, s).
    double clock_residual() const;
};

/// First-index patchwork rule for the reflection face at an exterior point:
/// smallest violated j with <grad(phi), g_j> <= 0 where phi is the smoothed
/// violation score sum_i chi(-psi_i/eps_phi) (quintic smoothstep chi).
/// Fallbacks: steepest descent of phi over violated faces, then deepest
/// violation. steepest = true skips the first-index scan and always takes
/// the steepest descent direction. Throws NoViolatedFace if nothing is
/// violated.
int select_reflection_face(const DomainSpec& dom, const Vecd& y, double eps_phi,
                           bool steepest = false);

/// Steps one event at a time; shared by the controlled simulator, the
/// reflected-SDE scheme and the estimators so that all of them see
/// bitwise-identical dynamics for a given stream.
class Stepper {
public:
    Stepper(const DomainSpec& dom, const DiffusionCoefficients& coeffs,
            const BoundaryBehavior& behavior, const Numerics& num, Vecd y0,
            CounterRng rng);

    /// Advances one event. max_dt caps the interior clock increment (used
    /// to land exactly on stop targets); reflections ignore it.
    StepKind step(double max_dt);

    bool currently_violated() const {
        for (int i = 0; i < dom_.num_faces(); ++i)
            if (dom_.faces[static_cast<size_t>(i)].value(y_) <= 0.0) return true;
        return false;
    }
    const Vecd& y() const { return y_; }
    double s() const { return s_.value(); }
    double lam0() const { return lam0_.value(); }
    double lam1() const { return lam1_.value(); }
    double last_dt() const { return last_dt_; }
    int last_face() const { return last_face_; }
    const Vecd& last_dw() const { return last_dw_; }
    const BoundaryAtom& last_atom() const { return last_atom_; }
    double delta() const { return delta_; }

private:
    const DomainSpec& dom_;
    const DiffusionCoefficients& coeffs_;
    const BoundaryBehavior& behavior_;
    Numerics num_;
    double delta_;
    double eps_phi_;
    CounterRng rng_;

    Vecd y_;
    KahanSum s_, lam0_, lam1_;
    std::uint64_t block_len_ = 0;

    double last_dt_ = 0.0;
    int last_face_ = -1;
    Vecd last_dw_;
    BoundaryAtom last_atom_;
};

ControlledPath simulate_controlled(const DomainSpec& dom,
                                   const DiffusionCoefficients& coeffs,
                                   const BoundaryBehavior& behavior, const Vecd& y0,
                                   StopRule stop, const Numerics& num,
                                   std::uint64_t seed, std::uint64_t path_index = 0,
                                   bool keep_increments = false);

/// Path restarted at controlled time tau: clocks rebased, state interpolated
/// at tau when it falls inside a record interval.
ControlledPath restart_path(const ControlledPath& path, double tau);

}  // namespace refldiff
