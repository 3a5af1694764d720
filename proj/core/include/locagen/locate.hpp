#pragma once

#include <vector>

#include "locagen/dsp.hpp"
#include "locagen/geometry.hpp"

namespace locagen::ml {
struct TrainedModel;
}

namespace locagen::loc {

struct MultilaterationProblem {
    ArrayGeometry geometry = ArrayGeometry::equilateral(0.1);
    Medium medium{};
    TdoaPair tdoa{};
    double radius_bound = 150.0;  // m
};

struct LocationEstimate {
    Vec2 position{};
    double azimuth_deg = 0.0;
    double residual = 0.0;  // m^2, objective at the returned point
    bool converged = false;
    int iterations = 0;
    bool range_unreliable = false;  // objective flat along the radial direction
};

struct MultilaterateOptions {
    int angle_cells = 360;
    int radius_cells = 24;
    double min_radius = 1.0;    // m, inner edge of the coarse grid
    int max_iterations = 300;
    double gradient_tolerance = 1e-9;
    double step_tolerance = 1e-10;  // m
};

// The two-term squared-residual objective:
//   (d2 - d1 - c*tau21)^2 + (d3 - d1 - c*tau31)^2
// with d_i the distance from (x, y) to mic i.
double objective(const MultilaterationProblem& problem, double x, double y);

struct ObjectiveEval {
    double value = 0.0;
    double grad_x = 0.0;
    double grad_y = 0.0;
};

ObjectiveEval objective_with_gradient(const MultilaterationProblem& problem, double x, double y);

// Two-stage search: coarse polar grid (angle x log-radius) inside the radius
// bound, then gradient descent with backtracking line search from the best
// grid cell. Non-convergence returns the best-found estimate with
// converged = false rather than throwing.
LocationEstimate multilaterate(const MultilaterationProblem& problem,
                               const MultilaterateOptions& options = {});

// Full pipeline from a TDOA pair: multilaterate for position, and when a
// model is supplied replace the azimuth with the model's prediction from
// (tau21, tau31, ratio).
LocationEstimate localize_pipeline(const TdoaPair& tdoa, const ArrayGeometry& geometry,
                                   const Medium& medium,
                                   const ml::TrainedModel* model = nullptr,
                                   const MultilaterateOptions& options = {});

// Same pipeline from three synchronized waveform channels; TDOAs come from
// GCC-PHAT (parabolic sub-sample refinement).
LocationEstimate localize_pipeline(const std::vector<dsp::Waveform>& channels,
                                   const ArrayGeometry& geometry, const Medium& medium,
                                   const ml::TrainedModel* model = nullptr,
                                   const MultilaterateOptions& options = {});

}  // namespace locagen::loc
