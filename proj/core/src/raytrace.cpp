#include "esw/raytrace.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

#include "esw/errors.hpp"

namespace esw {
namespace {

struct StencilEntry {
  int node = 0;
  int channel = 0;  // 0: value array, 1: logk-slope array
  double w = 0.0, wd = 0.0, wdd = 0.0;
};

using Stencil = std::vector<StencilEntry>;

struct Basis {
  double b[4], bd[4], bdd[4];  // h00, h10, h01, h11 and s-derivatives
};

Basis hermite_basis(double s) {
  Basis o;
  o.b[0] = 2 * s * s * s - 3 * s * s + 1;
  o.b[1] = s * s * s - 2 * s * s + s;
  o.b[2] = -2 * s * s * s + 3 * s * s;
  o.b[3] = s * s * s - s * s;
  o.bd[0] = 6 * s * s - 6 * s;
  o.bd[1] = 3 * s * s - 4 * s + 1;
  o.bd[2] = -6 * s * s + 6 * s;
  o.bd[3] = 3 * s * s - 2 * s;
  o.bdd[0] = 12 * s - 6;
  o.bdd[1] = 6 * s - 4;
  o.bdd[2] = -12 * s + 6;
  o.bdd[3] = 6 * s - 2;
  return o;
}

/// Stencil of one axis at query u. Spline axes expand cardinal tangents into
/// value weights; the Hermite axis addresses the slope channel directly. A
/// single-node Hermite axis degenerates to the linear extrapolation through
/// its stored slope.
Stencil axis_stencil(const FieldAxis& ax, double u, bool hermite) {
  const int n = static_cast<int>(ax.nodes.size());
  Stencil st;
  if (n == 1) {
    st.push_back({0, 0, 1.0, 0.0, 0.0});
    if (hermite) st.push_back({0, 1, u - ax.nodes[0], 1.0, 0.0});
    return st;
  }
  int cell;
  double s, h;
  if (ax.periodic) {
    h = ax.nodes[1] - ax.nodes[0];  // circle nodes are uniform by construction
    const double span = u - ax.nodes[0];
    double w = std::fmod(span, ax.period);
    if (w < 0.0) w += ax.period;
    cell = static_cast<int>(std::floor(w / h));
    if (cell >= n) cell = n - 1;
    s = (w - cell * h) / h;
  } else {
    const double lo = ax.nodes.front(), hi = ax.nodes.back();
    const double slack = 1e-9 * (hi - lo);
    if (u < lo - slack || u > hi + slack)
      throw OutOfDomainError("query outside the sampled field axis");
    cell = static_cast<int>(std::upper_bound(ax.nodes.begin(), ax.nodes.end(), u) -
                            ax.nodes.begin()) -
           1;
    cell = std::clamp(cell, 0, n - 2);
    h = ax.nodes[cell + 1] - ax.nodes[cell];
    s = (u - ax.nodes[cell]) / h;
  }
  const Basis bs = hermite_basis(s);
  auto push = [&](int node, int channel, double factor, int basis) {
    StencilEntry e;
    e.node = ax.periodic ? ((node % n) + n) % n : node;
    e.channel = channel;
    e.w = factor * bs.b[basis];
    e.wd = factor * bs.bd[basis] / h;
    e.wdd = factor * bs.bdd[basis] / h / h;
    st.push_back(e);
  };
  if (hermite) {
    push(cell, 0, 1.0, 0);
    push(cell + 1, 0, 1.0, 2);
    push(cell, 1, h, 1);
    push(cell + 1, 1, h, 3);
    return st;
  }
  // Cardinal tangents: central differences inside, one-sided at the ends.
  push(cell, 0, 1.0, 0);
  push(cell + 1, 0, 1.0, 2);
  const bool left_edge = !ax.periodic && cell == 0;
  const bool right_edge = !ax.periodic && cell + 1 == n - 1;
  auto gap = [&](int a, int b) {
    if (!ax.periodic) return ax.nodes[b] - ax.nodes[a];
    return h * (b - a);  // uniform circle spacing
  };
  if (left_edge) {
    push(cell, 0, -1.0, 1);
    push(cell + 1, 0, 1.0, 1);
  } else {
    const double span = gap(cell - 1, cell + 1);
    push(cell - 1, 0, -h / span, 1);
    push(cell + 1, 0, h / span, 1);
  }
  if (right_edge) {
    push(cell, 0, -1.0, 3);
    push(cell + 1, 0, 1.0, 3);
  } else {
    const double span = gap(cell, cell + 2);
    push(cell, 0, -h / span, 3);
    push(cell + 2, 0, h / span, 3);
  }
  return st;
}

void require_uniform(const std::vector<double>& nodes, const char* what) {
  if (nodes.empty()) throw OutOfDomainError(std::string(what) + ": no nodes");
  for (std::size_t i = 1; i < nodes.size(); ++i)
    if (!(nodes[i] > nodes[i - 1]))
      throw OutOfDomainError(std::string(what) + ": nodes must strictly increase");
  if (nodes.size() < 3) return;
  const double h = nodes[1] - nodes[0];
  for (std::size_t i = 1; i + 1 < nodes.size(); ++i)
    if (std::abs(nodes[i + 1] - nodes[i] - h) > 1e-9 * h)
      throw OutOfDomainError(std::string(what) + ": nodes must be uniformly spaced");
}

}  // namespace

HamiltonianField::Eval HamiltonianField::evaluate(double qx1, double qx2,
                                                  double qtheta,
                                                  double qlogk) const {
  const Stencil s1 = axis_stencil(x1, qx1, false);
  const Stencil s2 = axis_stencil(x2, qx2, false);
  const Stencil s3 = axis_stencil(theta, qtheta, false);
  const Stencil s4 = axis_stencil(logk, qlogk, true);
  const int n2 = static_cast<int>(x2.nodes.size());
  const int n3 = static_cast<int>(theta.nodes.size());
  const int n4 = static_cast<int>(logk.nodes.size());
  Eval out;
  out.grad.setZero();
  out.hess.setZero();
  for (const auto& e1 : s1)
    for (const auto& e2 : s2)
      for (const auto& e3 : s3)
        for (const auto& e4 : s4) {
          const std::size_t idx =
              ((static_cast<std::size_t>(e1.node) * n2 + e2.node) * n3 + e3.node) *
                  n4 +
              e4.node;
          const double sample = e4.channel == 0 ? values[idx] : slopes[idx];
          const double w[4] = {e1.w, e2.w, e3.w, e4.w};
          const double d[4] = {e1.wd, e2.wd, e3.wd, e4.wd};
          const double dd[4] = {e1.wdd, e2.wdd, e3.wdd, e4.wdd};
          out.value += w[0] * w[1] * w[2] * w[3] * sample;
          for (int a = 0; a < 4; ++a) {
            double ga = sample;
            for (int b = 0; b < 4; ++b) ga *= (b == a) ? d[b] : w[b];
            out.grad(a) += ga;
            for (int b = a; b < 4; ++b) {
              double hab = sample;
              if (a == b) {
                for (int cq = 0; cq < 4; ++cq) hab *= (cq == a) ? dd[cq] : w[cq];
              } else {
                for (int cq = 0; cq < 4; ++cq)
                  hab *= (cq == a || cq == b) ? d[cq] : w[cq];
              }
              out.hess(a, b) += hab;
            }
          }
        }
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) out.hess(b, a) = out.hess(a, b);
  // The tables hold the log of the eigenvalue; undo it.
  const double lam = std::exp(out.value);
  out.hess = lam * (out.hess + out.grad * out.grad.transpose());
  out.grad *= lam;
  out.value = lam;
  return out;
}

HamiltonianField::PhaseSpaceEval HamiltonianField::phase_space(
    const Eigen::Vector2d& x, const Eigen::Vector2d& xi) const {
  const double k = xi.norm();
  if (!(k > 0.0)) throw OutOfDomainError("covector must be nonzero");
  const double th = std::atan2(xi(1), xi(0));
  const Eval ev = evaluate(x(0), x(1), th, std::log(k));
  if (!(ev.value > 0.0))
    throw OutOfDomainError("interpolated eigenvalue is not positive");

  // Chain rule from interpolant coordinates (x1, x2, theta, logk) to
  // phase-space coordinates (x1, x2, xi1, xi2).
  const double k2 = k * k, k4 = k2 * k2;
  Eigen::Matrix<double, 4, 4> j = Eigen::Matrix<double, 4, 4>::Zero();
  j(0, 0) = 1.0;
  j(1, 1) = 1.0;
  j(2, 2) = -xi(1) / k2;
  j(2, 3) = xi(0) / k2;
  j(3, 2) = xi(0) / k2;
  j(3, 3) = xi(1) / k2;

  const Eigen::Vector4d lam_u = ev.grad;
  const Eigen::Vector4d lam_p = j.transpose() * lam_u;
  Eigen::Matrix4d lam_pp = j.transpose() * ev.hess * j;
  Eigen::Matrix2d theta_xixi;
  theta_xixi << 2.0 * xi(0) * xi(1), xi(1) * xi(1) - xi(0) * xi(0),
      xi(1) * xi(1) - xi(0) * xi(0), -2.0 * xi(0) * xi(1);
  theta_xixi /= k4;
  const Eigen::Matrix2d logk_xixi =
      Eigen::Matrix2d::Identity() / k2 - 2.0 * xi * xi.transpose() / k4;
  lam_pp.block<2, 2>(2, 2) += lam_u(2) * theta_xixi + lam_u(3) * logk_xixi;

  PhaseSpaceEval out;
  out.h = std::sqrt(ev.value);
  const Eigen::Vector4d h_p = lam_p / (2.0 * out.h);
  const Eigen::Matrix4d h_pp =
      lam_pp / (2.0 * out.h) -
      lam_p * lam_p.transpose() / (4.0 * out.h * out.h * out.h);
  out.h_x = h_p.head<2>();
  out.h_xi = h_p.tail<2>();
  out.h_xx = h_pp.block<2, 2>(0, 0);
  out.h_xxi = h_pp.block<2, 2>(0, 2);
  out.h_xixi = h_pp.block<2, 2>(2, 2);
  return out;
}

HamiltonianField build_hamiltonian(const MaterialModel& model,
                                   const std::vector<double>& x1_nodes,
                                   const std::vector<double>& x2_nodes,
                                   const std::vector<double>& theta_nodes,
                                   const std::vector<double>& k_nodes,
                                   const FieldOptions& opts) {
  require_uniform(x1_nodes, "x1 axis");
  require_uniform(x2_nodes, "x2 axis");
  require_uniform(theta_nodes, "theta axis");
  if (k_nodes.empty()) throw OutOfDomainError("k axis: no nodes");
  for (std::size_t i = 0; i < k_nodes.size(); ++i) {
    if (!(k_nodes[i] > 0.0)) throw OutOfDomainError("k axis: nodes must be positive");
    if (i > 0 && !(k_nodes[i] > k_nodes[i - 1]))
      throw OutOfDomainError("k axis: nodes must strictly increase");
  }
  const int nt = static_cast<int>(theta_nodes.size());
  if (nt > 1) {
    const double h = 2.0 * M_PI / nt;
    for (int i = 0; i < nt; ++i)
      if (std::abs(theta_nodes[i] - theta_nodes[0] - i * h) > 1e-9)
        throw OutOfDomainError("theta axis: nodes must cover the circle uniformly");
  }

  HamiltonianField field;
  field.x1.nodes = x1_nodes;
  field.x2.nodes = x2_nodes;
  field.theta.nodes = theta_nodes;
  field.theta.periodic = true;
  field.theta.period = 2.0 * M_PI;
  field.logk.nodes.reserve(k_nodes.size());
  for (double k : k_nodes) field.logk.nodes.push_back(std::log(k));
  field.family = opts.family;
  field.branch = opts.branch;
  field.model_hash = model.content_hash();

  const int n1 = static_cast<int>(x1_nodes.size());
  const int n2 = static_cast<int>(x2_nodes.size());
  const int nk = static_cast<int>(k_nodes.size());
  field.values.assign(static_cast<std::size_t>(n1) * n2 * nt * nk, 0.0);
  field.slopes.assign(field.values.size(), 0.0);

  DispersionOptions dopts;
  dopts.overlap_min = opts.overlap_min;
  dopts.spectrum = opts.spectrum;

  auto column_grid = [&](const Vector2d& x, const Vector2d& dir) {
    if (opts.grid) return *opts.grid;
    DepthGrid lo = default_grid(model, x, dir, k_nodes.front(),
                                opts.nodes_per_wavelength);
    if (nk == 1) return lo;
    const DepthGrid hi = default_grid(model, x, dir, k_nodes.back(),
                                      opts.nodes_per_wavelength);
    DepthGrid g;
    g.z_min = std::min(lo.z_min, hi.z_min);
    const double fine = hi.spacing();
    g.cells = std::clamp(static_cast<int>(std::ceil(-g.z_min / fine)), 16, 12000);
    return g;
  };

  auto fill_column = [&](int i1, int i2, int it) {
    const Vector2d x(x1_nodes[i1], x2_nodes[i2]);
    const Vector2d dir(std::cos(theta_nodes[it]), std::sin(theta_nodes[it]));
    const DepthGrid grid = column_grid(x, dir);
    const DispersionCurve curve = dispersion_curve(model, x, dir, k_nodes,
                                                   opts.branch, grid, opts.family,
                                                   dopts);
    if (curve.status != CurveStatus::complete ||
        curve.samples.size() != k_nodes.size())
      throw BranchAbsentError(
          "branch " + std::to_string(opts.branch) + " not continuable over the "
          "k axis at x1=" + std::to_string(x(0)) + " x2=" + std::to_string(x(1)) +
          " theta=" + std::to_string(theta_nodes[it]));
    for (int ik = 0; ik < nk; ++ik) {
      const DispersionSample& s = curve.samples[ik];
      const std::size_t idx =
          ((static_cast<std::size_t>(i1) * n2 + i2) * nt + it) * nk + ik;
      if (!(s.lambda > 0.0))
        throw BranchAbsentError("branch eigenvalue is not positive at k=" +
                                std::to_string(s.k));
      field.values[idx] = std::log(s.lambda);
      // d log lambda / d log k = 2 vg / vp.
      field.slopes[idx] = 2.0 * s.k * s.group_velocity / std::sqrt(s.lambda);
    }
  };

  for (int i1 = 0; i1 < n1; ++i1)
    for (int i2 = 0; i2 < n2; ++i2)
      for (int it = 0; it < nt; ++it) fill_column(i1, i2, it);

  // Interior probes: fresh solves at off-node points, compared against the
  // finished interpolant.
  if (opts.probes > 0) {
    std::mt19937_64 rng(opts.probe_seed);
    std::uniform_real_distribution<double> u01(0.15, 0.85);
    for (int p = 0; p < opts.probes; ++p) {
      auto pick = [&](const std::vector<double>& nodes) {
        if (nodes.size() == 1) return nodes[0];
        return nodes.front() + u01(rng) * (nodes.back() - nodes.front());
      };
      const double px1 = pick(x1_nodes);
      const double px2 = pick(x2_nodes);
      const double pth = nt == 1 ? theta_nodes[0]
                                 : theta_nodes[0] + u01(rng) * 2.0 * M_PI;
      const double pk = nk == 1 ? k_nodes[0]
                                : std::exp(std::log(k_nodes.front()) +
                                           u01(rng) * (std::log(k_nodes.back()) -
                                                       std::log(k_nodes.front())));
      std::vector<double> path;
      for (double k : k_nodes)
        if (k < pk * (1.0 - 1e-12)) path.push_back(k);
      path.push_back(pk);
      const Vector2d x(px1, px2);
      const Vector2d dir(std::cos(pth), std::sin(pth));
      try {
        const DispersionCurve probe = dispersion_curve(
            model, x, dir, path, opts.branch, column_grid(x, dir), opts.family,
            dopts);
        if (probe.status != CurveStatus::complete) continue;
        const double exact = probe.samples.back().lambda;
        const double interp = field.evaluate(px1, px2, pth, std::log(pk)).value;
        field.cv_error = std::max(field.cv_error,
                                  std::abs(interp - exact) / std::abs(exact));
      } catch (const Error&) {
        // A probe that cannot be continued does not invalidate the field.
      }
    }
  }
  return field;
}

namespace {

constexpr int kStateDim = 22;  // x(2), xi(2), phase, tau, V(16)

using State = Eigen::Matrix<double, kStateDim, 1>;

State ray_rhs(const HamiltonianField& field, const State& y) {
  const Eigen::Vector2d x = y.segment<2>(0);
  const Eigen::Vector2d xi = y.segment<2>(2);
  const auto pe = field.phase_space(x, xi);
  State dy;
  dy.segment<2>(0) = pe.h_xi;
  dy.segment<2>(2) = -pe.h_x;
  const double phase_rate = xi.dot(pe.h_xi);
  dy(4) = phase_rate;
  dy(5) = phase_rate / pe.h;
  Eigen::Matrix4d a;
  a.block<2, 2>(0, 0) = pe.h_xxi.transpose();
  a.block<2, 2>(0, 2) = pe.h_xixi;
  a.block<2, 2>(2, 0) = -pe.h_xx;
  a.block<2, 2>(2, 2) = -pe.h_xxi;
  const Eigen::Map<const Eigen::Matrix4d> v(y.data() + 6);
  Eigen::Map<Eigen::Matrix4d> dv(dy.data() + 6);
  dv = a * v;
  return dy;
}

State rk4_step(const HamiltonianField& field, const State& y, double h) {
  const State k1 = ray_rhs(field, y);
  const State k2 = ray_rhs(field, y + 0.5 * h * k1);
  const State k3 = ray_rhs(field, y + 0.5 * h * k2);
  const State k4 = ray_rhs(field, y + h * k3);
  return y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

RayResult trace_ray(const HamiltonianField& field, const Eigen::Vector2d& x0,
                    double theta0, double k0, const TraceOptions& opts) {
  if (!(k0 > 0.0)) throw OutOfDomainError("initial wavenumber must be positive");
  if (!(opts.t_max > 0.0)) throw OutOfDomainError("t_max must be positive");
  RayResult ray;
  ray.fan = opts.fan;

  State y;
  y.setZero();
  y.segment<2>(0) = x0;
  y(2) = k0 * std::cos(theta0);
  y(3) = k0 * std::sin(theta0);
  Eigen::Map<Eigen::Matrix4d>(y.data() + 6).setIdentity();

  const Eigen::Vector2d that(-std::sin(theta0), std::cos(theta0));
  Eigen::Vector4d fan_seed;
  if (opts.fan == FanKind::point)
    fan_seed << 0.0, 0.0, k0 * that(0), k0 * that(1);
  else
    fan_seed << that(0), that(1), 0.0, 0.0;

  auto record = [&](double t, const State& s) {
    const Eigen::Vector2d x = s.segment<2>(0);
    const Eigen::Vector2d xi = s.segment<2>(2);
    const auto pe = field.phase_space(x, xi);
    RaySample smp;
    smp.t = t;
    smp.x = x;
    smp.xi = xi;
    smp.h = pe.h;
    smp.phase = s(4);
    smp.tau = s(5);
    smp.v = Eigen::Map<const Eigen::Matrix4d>(s.data() + 6);
    const Eigen::Vector4d dy = smp.v * fan_seed;
    smp.det_j = pe.h_xi(0) * dy(1) - pe.h_xi(1) * dy(0);
    ray.samples.push_back(smp);
    if (ray.samples.size() == 1)
      ray.h0 = pe.h;
    else
      ray.h_drift = std::max(ray.h_drift, std::abs(pe.h - ray.h0) /
                                              std::max(1e-300, std::abs(ray.h0)));
  };

  record(0.0, y);

  // Accepted states must sit strictly inside the sampled box, not merely
  // within the evaluation slack, so the last sample of an exiting ray never
  // overshoots the boundary.
  auto in_axis = [](const FieldAxis& ax, double u) {
    return ax.periodic || ax.nodes.size() < 2 ||
           (u >= ax.nodes.front() && u <= ax.nodes.back());
  };
  auto inside = [&](const State& s) {
    const double k = s.segment<2>(2).norm();
    return k > 0.0 && in_axis(field.x1, s(0)) && in_axis(field.x2, s(1)) &&
           in_axis(field.logk, std::log(k));
  };

  double t = 0.0;
  double h = std::min(opts.dt0, opts.t_max);
  int steps = 0;
  while (t < opts.t_max && steps < opts.max_steps) {
    if (t + h > opts.t_max) h = opts.t_max - t;
    State big, fine;
    bool exited = false;
    try {
      big = rk4_step(field, y, h);
      fine = rk4_step(field, rk4_step(field, y, 0.5 * h), 0.5 * h);
      exited = !inside(fine);
    } catch (const OutOfDomainError&) {
      exited = true;
    }
    if (exited) {
      if (h > opts.dt_min * 4.0) {
        h *= 0.25;  // bisect toward the boundary before giving up
        continue;
      }
      ray.stop = StopReason::domain_exit;
      break;
    }
    double err = 0.0;
    for (int i = 0; i < kStateDim; ++i) {
      const double scale =
          opts.tol * (1.0 + std::max(std::abs(y(i)), std::abs(fine(i))));
      err = std::max(err, std::abs(big(i) - fine(i)) / (15.0 * scale));
    }
    if (err <= 1.0) {
      y = fine + (fine - big) / 15.0;
      t += h;
      record(t, y);
      const double grow = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
      h *= std::clamp(grow, 0.2, 5.0);
      ++steps;
    } else {
      h *= std::max(0.1, 0.9 * std::pow(err, -0.25));
      if (h < opts.dt_min)
        throw StepRejectedError(
            "step size underflow at t=" + std::to_string(t) +
            "; the field may be too rough for the requested tolerance");
    }
  }

  // Caustics: sign changes of the spreading determinant.
  for (std::size_t i = 1; i < ray.samples.size(); ++i) {
    const double a = ray.samples[i - 1].det_j;
    const double b = ray.samples[i].det_j;
    if (a != 0.0 && b != 0.0 && std::signbit(a) != std::signbit(b))
      ray.caustic_times.push_back(0.5 * (ray.samples[i - 1].t + ray.samples[i].t));
  }

  // Amplitude normalization at t_ref.
  ray.t_ref = opts.t_ref >= 0.0
                  ? opts.t_ref
                  : (ray.samples.size() > 1 ? ray.samples[1].t : 0.0);
  double j_ref = 0.0;
  for (std::size_t i = 1; i < ray.samples.size(); ++i) {
    if (ray.samples[i].t >= ray.t_ref) {
      const auto& s0 = ray.samples[i - 1];
      const auto& s1 = ray.samples[i];
      const double w = s1.t > s0.t ? (ray.t_ref - s0.t) / (s1.t - s0.t) : 1.0;
      j_ref = std::abs(s0.det_j + w * (s1.det_j - s0.det_j));
      break;
    }
  }
  if (j_ref == 0.0 && !ray.samples.empty()) j_ref = std::abs(ray.samples.back().det_j);
  for (auto& s : ray.samples)
    s.a0 = std::abs(s.det_j) > 0.0
               ? std::sqrt(j_ref / std::abs(s.det_j))
               : std::numeric_limits<double>::infinity();
  return ray;
}

double transport_amplitude(const RayResult& ray, double t) {
  if (ray.samples.empty()) throw OutOfDomainError("empty ray");
  if (t <= ray.samples.front().t) return ray.samples.front().a0;
  if (t >= ray.samples.back().t) return ray.samples.back().a0;
  for (std::size_t i = 1; i < ray.samples.size(); ++i) {
    if (ray.samples[i].t >= t) {
      const auto& s0 = ray.samples[i - 1];
      const auto& s1 = ray.samples[i];
      const double w = (t - s0.t) / (s1.t - s0.t);
      const double j = s0.det_j + w * (s1.det_j - s0.det_j);
      const double j_ref =
          s0.a0 > 0.0 && std::isfinite(s0.a0)
              ? s0.a0 * s0.a0 * std::abs(s0.det_j)
              : s1.a0 * s1.a0 * std::abs(s1.det_j);
      return std::abs(j) > 0.0 ? std::sqrt(j_ref / std::abs(j))
                               : std::numeric_limits<double>::infinity();
    }
  }
  return ray.samples.back().a0;
}

RayVelocities group_and_phase_velocity(const HamiltonianField& field,
                                       const Eigen::Vector2d& x, double theta,
                                       double k) {
  const Eigen::Vector2d xi(k * std::cos(theta), k * std::sin(theta));
  const auto pe = field.phase_space(x, xi);
  RayVelocities out;
  out.group = pe.h_xi;
  out.group_speed = pe.h_xi.norm();
  out.phase_speed = pe.h / k;
  return out;
}

double wavenumber_for_frequency(const HamiltonianField& field,
                                const Eigen::Vector2d& x, double theta,
                                double omega) {
  if (!(omega > 0.0)) throw OutOfDomainError("frequency must be positive");
  auto freq = [&](double lk) {
    return std::sqrt(field.evaluate(x(0), x(1), theta, lk).value);
  };
  if (field.logk.nodes.size() == 1) {
    // Power-law dispersion through the stored slope solves in closed form.
    const double lk0 = field.logk.nodes[0];
    const auto ev = field.evaluate(x(0), x(1), theta, lk0);
    const double slope = ev.grad(3) / ev.value;  // d log lambda / d logk
    if (slope <= 0.0) throw NoRootError("dispersion slope is not positive");
    return std::exp(lk0 + std::log(omega * omega / ev.value) / slope);
  }
  double lo = field.logk.nodes.front();
  double hi = field.logk.nodes.back();
  double flo = freq(lo) - omega;
  double fhi = freq(hi) - omega;
  if (flo > 0.0 || fhi < 0.0)
    throw NoRootError("frequency not bracketed by the sampled k range");
  for (int i = 0; i < 100 && hi - lo > 1e-14; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (freq(mid) - omega <= 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

}  // namespace esw
