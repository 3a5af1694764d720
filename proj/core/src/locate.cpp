#include "locagen/locate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "locagen/models.hpp"

namespace locagen::loc {

double objective(const MultilaterationProblem& problem, double x, double y) {
    const auto& m = problem.geometry.mics;
    const double c = problem.medium.speed_of_sound;
    const double d1 = std::hypot(x - m[0].x, y - m[0].y);
    const double d2 = std::hypot(x - m[1].x, y - m[1].y);
    const double d3 = std::hypot(x - m[2].x, y - m[2].y);
    const double g2 = d2 - d1 - c * problem.tdoa.tau21;
    const double g3 = d3 - d1 - c * problem.tdoa.tau31;
    return g2 * g2 + g3 * g3;
}

ObjectiveEval objective_with_gradient(const MultilaterationProblem& problem, double x,
                                      double y) {
    const auto& m = problem.geometry.mics;
    const double c = problem.medium.speed_of_sound;

    double d[3], ux[3], uy[3];
    for (int i = 0; i < 3; ++i) {
        const double dx = x - m[static_cast<std::size_t>(i)].x;
        const double dy = y - m[static_cast<std::size_t>(i)].y;
        d[i] = std::hypot(dx, dy);
        const double safe = std::max(d[i], 1e-12);
        ux[i] = dx / safe;
        uy[i] = dy / safe;
    }
    const double g2 = d[1] - d[0] - c * problem.tdoa.tau21;
    const double g3 = d[2] - d[0] - c * problem.tdoa.tau31;

    ObjectiveEval eval;
    eval.value = g2 * g2 + g3 * g3;
    eval.grad_x = 2.0 * g2 * (ux[1] - ux[0]) + 2.0 * g3 * (ux[2] - ux[0]);
    eval.grad_y = 2.0 * g2 * (uy[1] - uy[0]) + 2.0 * g3 * (uy[2] - uy[0]);
    return eval;
}

LocationEstimate multilaterate(const MultilaterationProblem& problem,
                               const MultilaterateOptions& options) {
    if (!std::isfinite(problem.tdoa.tau21) || !std::isfinite(problem.tdoa.tau31))
        throw std::invalid_argument("multilaterate: non-finite TDOAs");
    problem.geometry.validate();

    const Vec2 center = problem.geometry.centroid();

    // stage 1: coarse polar grid over (angle x log-radius)
    const std::size_t n_angles = static_cast<std::size_t>(options.angle_cells);
    const std::size_t n_radii = static_cast<std::size_t>(options.radius_cells);
    std::vector<double> grid(n_angles * n_radii);
    std::vector<Vec2> grid_point(n_angles * n_radii);
    const double log_r0 = std::log(options.min_radius);
    const double log_r1 = std::log(problem.radius_bound);
    for (std::size_t ai = 0; ai < n_angles; ++ai) {
        const double theta = 2.0 * kPi * static_cast<double>(ai) / static_cast<double>(n_angles);
        const double cos_t = std::cos(theta);
        const double sin_t = std::sin(theta);
        for (std::size_t ri = 0; ri < n_radii; ++ri) {
            const double f =
                n_radii == 1 ? 0.0 : static_cast<double>(ri) / static_cast<double>(n_radii - 1);
            const double r = std::exp(log_r0 + f * (log_r1 - log_r0));
            const Vec2 p{center.x + r * cos_t, center.y + r * sin_t};
            grid[ai * n_radii + ri] = objective(problem, p.x, p.y);
            grid_point[ai * n_radii + ri] = p;
        }
    }

    // Starting points for refinement. The residual surface is multi-modal
    // (hyperbola branches can nearly touch twice) and the basins can merge
    // on a coarse mesh, so a single best cell is not enough: take the best
    // cell of every radius row plus every 2D-local-minimum cell.
    std::vector<std::pair<double, Vec2>> starts;
    std::size_t best_cell = 0;
    for (std::size_t ri = 0; ri < n_radii; ++ri) {
        std::size_t row_best = ri;  // cell index (0 * n_radii + ri)
        for (std::size_t ai = 1; ai < n_angles; ++ai)
            if (grid[ai * n_radii + ri] < grid[row_best]) row_best = ai * n_radii + ri;
        starts.push_back({grid[row_best], grid_point[row_best]});
        if (grid[row_best] < grid[best_cell]) best_cell = row_best;
    }
    for (std::size_t ai = 0; ai < n_angles; ++ai) {
        for (std::size_t ri = 0; ri < n_radii; ++ri) {
            const double v = grid[ai * n_radii + ri];
            bool is_min = true;
            for (int da = -1; da <= 1 && is_min; ++da) {
                for (int dr = -1; dr <= 1; ++dr) {
                    if (da == 0 && dr == 0) continue;
                    const std::size_t aj = static_cast<std::size_t>(
                        (static_cast<long long>(ai) + da + static_cast<long long>(n_angles)) %
                        static_cast<long long>(n_angles));
                    const long long rj = static_cast<long long>(ri) + dr;
                    if (rj < 0 || rj >= static_cast<long long>(n_radii)) continue;
                    if (grid[aj * n_radii + static_cast<std::size_t>(rj)] < v) {
                        is_min = false;
                        break;
                    }
                }
            }
            if (is_min) starts.push_back({v, grid_point[ai * n_radii + ri]});
        }
    }
    std::sort(starts.begin(), starts.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    const double best_x = grid_point[best_cell].x;
    const double best_y = grid_point[best_cell].y;

    // stage 2: Levenberg-Marquardt refinement of the two-term least-squares
    // objective from each candidate basin. High damping behaves like
    // gradient descent; low damping gives Gauss-Newton steps, which plain
    // descent needs along the long flat far-field valley of this objective.
    struct Refined {
        double x, y;
        ObjectiveEval eval;
        bool converged;
        int iterations;
    };
    auto refine = [&](Vec2 start) {
        Refined out{start.x, start.y, objective_with_gradient(problem, start.x, start.y), false,
                    0};
        double lambda = 1e-3;
        for (; out.iterations < options.max_iterations; ++out.iterations) {
            const double grad_norm = std::hypot(out.eval.grad_x, out.eval.grad_y);
            // the convergence flag follows the stated thresholds; polishing
            // continues until no improving step exists, so the returned
            // point is pinned to machine precision
            if (grad_norm < options.gradient_tolerance) out.converged = true;

            // residuals and Jacobian rows at the current point
            const auto& m = problem.geometry.mics;
            const double c = problem.medium.speed_of_sound;
            double d[3], ux[3], uy[3];
            for (int i = 0; i < 3; ++i) {
                const double dx = out.x - m[static_cast<std::size_t>(i)].x;
                const double dy = out.y - m[static_cast<std::size_t>(i)].y;
                d[i] = std::max(std::hypot(dx, dy), 1e-12);
                ux[i] = dx / d[i];
                uy[i] = dy / d[i];
            }
            const double r2 = d[1] - d[0] - c * problem.tdoa.tau21;
            const double r3 = d[2] - d[0] - c * problem.tdoa.tau31;
            const double j2x = ux[1] - ux[0], j2y = uy[1] - uy[0];
            const double j3x = ux[2] - ux[0], j3y = uy[2] - uy[0];

            const double a = j2x * j2x + j3x * j3x;
            const double b = j2x * j2y + j3x * j3y;
            const double cc = j2y * j2y + j3y * j3y;
            const double gx = j2x * r2 + j3x * r3;
            const double gy = j2y * r2 + j3y * r3;

            bool accepted = false;
            double accepted_step = 0.0;
            while (lambda < 1e14) {
                const double axx = a + lambda * std::max(a, 1e-12);
                const double ayy = cc + lambda * std::max(cc, 1e-12);
                const double det = axx * ayy - b * b;
                if (det == 0.0) break;
                double tx = out.x + (-gx * ayy + gy * b) / det;
                double ty = out.y + (-gy * axx + gx * b) / det;
                // keep the search inside the declared radius bound; for
                // inconsistent TDOAs the objective keeps improving all the
                // way to infinite range
                const double tr = std::hypot(tx - center.x, ty - center.y);
                if (tr > problem.radius_bound) {
                    tx = center.x + (tx - center.x) * (problem.radius_bound / tr);
                    ty = center.y + (ty - center.y) * (problem.radius_bound / tr);
                }
                const ObjectiveEval next = objective_with_gradient(problem, tx, ty);
                if (next.value < out.eval.value) {
                    accepted_step = std::hypot(tx - out.x, ty - out.y);
                    out.x = tx;
                    out.y = ty;
                    out.eval = next;
                    lambda = std::max(lambda * 0.3, 1e-12);
                    accepted = true;
                    break;
                }
                lambda *= 4.0;
            }
            if (accepted && accepted_step < options.step_tolerance) out.converged = true;
            if (!accepted) {
                // no improving step exists down to machine precision
                out.converged = true;
                break;
            }
        }
        return out;
    };

    // When several candidates reach numerically-zero residual the TDOA pair
    // is genuinely ambiguous (hyperbola branches can cross twice); return
    // the candidate farthest from the array, the far-field reading.
    constexpr double kZeroResidual = 1e-18;
    auto radius_of = [&center](const Refined& r) {
        return std::hypot(r.x - center.x, r.y - center.y);
    };
    Refined best = refine(starts.front().second);
    for (std::size_t s = 1; s < starts.size(); ++s) {
        const Refined candidate = refine(starts[s].second);
        const bool tie = candidate.eval.value < kZeroResidual && best.eval.value < kZeroResidual;
        if (tie ? radius_of(candidate) > radius_of(best)
                : candidate.eval.value < best.eval.value)
            best = candidate;
    }
    // the incumbent grid point never wins over its own refinement, but keep
    // the guarantee explicit
    if (objective(problem, best_x, best_y) < best.eval.value)
        best = Refined{best_x, best_y, objective_with_gradient(problem, best_x, best_y), false, 0};

    LocationEstimate est;
    est.position = {best.x, best.y};
    est.azimuth_deg = SourcePosition{best.x, best.y}.azimuth_deg();
    est.residual = best.eval.value;
    est.converged = best.converged;
    est.iterations = best.iterations;
    const double x = best.x;
    const double y = best.y;
    const ObjectiveEval cur = best.eval;

    // radial curvature probe: flat surfaces mean range is not resolvable
    const double r = std::hypot(x - center.x, y - center.y);
    if (r > 0.0) {
        const double h = 0.01;  // m
        const double rx = (x - center.x) / r;
        const double ry = (y - center.y) / r;
        const double f0 = cur.value;
        const double fp = objective(problem, x + h * rx, y + h * ry);
        const double fm = objective(problem, x - h * rx, y - h * ry);
        const double curvature = (fp - 2.0 * f0 + fm) / (h * h);
        est.range_unreliable = std::fabs(curvature) < 1e-12;
    }
    return est;
}

LocationEstimate localize_pipeline(const TdoaPair& tdoa, const ArrayGeometry& geometry,
                                   const Medium& medium, const ml::TrainedModel* model,
                                   const MultilaterateOptions& options) {
    MultilaterationProblem problem;
    problem.geometry = geometry;
    problem.medium = medium;
    problem.tdoa = tdoa;
    LocationEstimate est = multilaterate(problem, options);
    if (model != nullptr)
        est.azimuth_deg = ml::predict_azimuth(*model, {tdoa.tau21, tdoa.tau31, tdoa.ratio});
    return est;
}

LocationEstimate localize_pipeline(const std::vector<dsp::Waveform>& channels,
                                   const ArrayGeometry& geometry, const Medium& medium,
                                   const ml::TrainedModel* model,
                                   const MultilaterateOptions& options) {
    if (channels.size() != 3)
        throw std::invalid_argument("localize_pipeline: expected exactly 3 channels");
    const double fs = channels[0].sample_rate;
    const double max_span = geometry.max_pair_distance() / medium.speed_of_sound;
    const int max_lag = static_cast<int>(std::ceil(max_span * fs)) + 3;

    const auto d21 = dsp::gcc_phat(channels[0], channels[1], max_lag, dsp::Interp::parabolic);
    const auto d31 = dsp::gcc_phat(channels[0], channels[2], max_lag, dsp::Interp::parabolic);
    const TdoaPair tdoa = TdoaPair::from_taus(d21.tau_seconds, d31.tau_seconds);
    return localize_pipeline(tdoa, geometry, medium, model, options);
}

}  // namespace locagen::loc
