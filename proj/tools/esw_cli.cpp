// Command line front end: model validation, limiting velocities, dispersion
// curves, surface impedance, eigenvalue count checks, ray tracing and normal
// mode catalogs, with CSV artifacts, JSON summaries and a flat file cache.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "CLI11.hpp"
#include "json.hpp"

#include "esw/acoustic.hpp"
#include "esw/errors.hpp"
#include "esw/hash.hpp"
#include "esw/impedance.hpp"
#include "esw/model.hpp"
#include "esw/modes.hpp"
#include "esw/raytrace.hpp"
#include "esw/spectrum.hpp"
#include "esw/weyl.hpp"

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

/// Full round-trip decimal form, locale independent.
std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hex16(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Canonical parameter record: fixed insertion order, full precision values.
/// Its hash stamps artifact headers and keys cache entries, so it contains
/// every parameter that can change the computed bytes and nothing else.
class ConfigKey {
 public:
  explicit ConfigKey(const std::string& op) : text_(op) {}

  ConfigKey& add(const std::string& key, const std::string& value) {
    text_ += ';';
    text_ += key;
    text_ += '=';
    text_ += value;
    return *this;
  }
  ConfigKey& add(const std::string& key, double value) { return add(key, num(value)); }
  ConfigKey& add(const std::string& key, int value) { return add(key, std::to_string(value)); }
  ConfigKey& add(const std::string& key, std::uint64_t value) {
    return add(key, std::to_string(value));
  }
  ConfigKey& add(const std::string& key, bool value) {
    return add(key, std::string(value ? "1" : "0"));
  }
  ConfigKey& add(const std::string& key, const std::vector<double>& values) {
    std::string joined;
    for (double v : values) {
      if (!joined.empty()) joined += ',';
      joined += num(v);
    }
    return add(key, joined);
  }

  std::uint64_t hash() const { return esw::fnv1a64(text_); }

 private:
  std::string text_;
};

/// Worker count from ESW_WORKERS, clamped to a sane range.
int worker_count() {
  const char* s = std::getenv("ESW_WORKERS");
  if (s == nullptr || *s == '\0') return 1;
  int n = std::atoi(s);
  return std::clamp(n, 1, 64);
}

/// Run fn(i) for i in [0, n). Each task owns result slot i, so the merge
/// order is fixed regardless of the worker count. The first exception wins
/// and is rethrown after all workers drain.
template <class F>
void parallel_for(int n, F&& fn) {
  const int workers = std::min(worker_count(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first;
  std::mutex first_mutex;
  auto drain = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(first_mutex);
        if (!first) first = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(drain);
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw CLI::ValidationError(flag + ": '" + item + "' is not a number");
    }
  }
  if (out.empty()) throw CLI::ValidationError(flag + ": empty list");
  return out;
}

esw::Family parse_family(const std::string& name) {
  if (name == "full") return esw::Family::full;
  if (name == "love") return esw::Family::love;
  if (name == "rayleigh") return esw::Family::rayleigh;
  throw CLI::ValidationError("--family must be full, love or rayleigh");
}

const char* family_name(esw::Family f) {
  switch (f) {
    case esw::Family::love: return "love";
    case esw::Family::rayleigh: return "rayleigh";
    default: return "full";
  }
}

/// Flags shared by every computing subcommand.
struct CommonArgs {
  std::string model_path;
  std::string out_dir = ".";
  bool no_cache = false;
  double x1 = 0.0;
  double x2 = 0.0;
  double theta = 0.0;
};

void add_common(CLI::App* cmd, CommonArgs& c) {
  cmd->add_option("--model", c.model_path, "model JSON file")->required();
  cmd->add_option("-o,--out", c.out_dir, "output directory (default .)");
  cmd->add_flag("--no-cache", c.no_cache, "recompute even when a cached result exists");
  cmd->add_option("--x1", c.x1, "lateral position, first coordinate");
  cmd->add_option("--x2", c.x2, "lateral position, second coordinate");
  cmd->add_option("--theta", c.theta, "propagation angle in radians");
}

Eigen::Vector2d position(const CommonArgs& c) { return {c.x1, c.x2}; }
Eigen::Vector2d direction(const CommonArgs& c) {
  return {std::cos(c.theta), std::sin(c.theta)};
}

/// One finished subcommand result: a CSV body plus its JSON summary payload.
struct Artifact {
  std::string columns;  // CSV header line, no newline
  std::string body;     // newline terminated data rows
  ojson summary;        // merged into the summary file after the hash stamp
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << bytes;
  if (!out) throw esw::ValidationError("cannot write '" + p.string() + "'");
}

std::size_t count_rows(const std::string& body) {
  return static_cast<std::size_t>(std::count(body.begin(), body.end(), '\n'));
}

/// Renders one subcommand run into <op>.csv and <op>_summary.json under the
/// output directory. With the cache enabled, a prior run with the same model
/// hash, operation and parameter hash is replayed byte for byte from the
/// flat files under <out>/cache instead of recomputing.
void emit(const CommonArgs& c, const std::string& op, std::uint64_t model_hash,
          const ConfigKey& key, const std::function<Artifact()>& compute) {
  const std::uint64_t config_hash = key.hash();
  const fs::path out_dir(c.out_dir);
  fs::create_directories(out_dir);
  const fs::path csv_path = out_dir / (op + ".csv");
  const fs::path sum_path = out_dir / (op + "_summary.json");

  const std::string stem = op + "-" + hex16(model_hash) + "-" + hex16(config_hash);
  const fs::path cache_csv = out_dir / "cache" / (stem + ".csv");
  const fs::path cache_sum = out_dir / "cache" / (stem + ".json");

  if (!c.no_cache && fs::exists(cache_csv) && fs::exists(cache_sum)) {
    const std::string csv = read_file(cache_csv);
    write_file(csv_path, csv);
    write_file(sum_path, read_file(cache_sum));
    std::cout << op << ": cache hit " << stem << "\n";
    std::cout << "wrote " << csv_path.string() << " (" << count_rows(csv) - 2
              << " rows) and " << sum_path.string() << "\n";
    return;
  }

  Artifact a = compute();
  std::string csv = "# model=" + hex16(model_hash) + " config=" + hex16(config_hash) + "\n";
  csv += a.columns;
  csv += '\n';
  csv += a.body;

  ojson summary;
  summary["command"] = op;
  summary["model_hash"] = hex16(model_hash);
  summary["config_hash"] = hex16(config_hash);
  summary["outputs"] = ojson::array({op + ".csv"});
  summary.update(a.summary);
  const std::string sum = summary.dump(2) + "\n";

  write_file(csv_path, csv);
  write_file(sum_path, sum);
  if (!c.no_cache) {
    fs::create_directories(out_dir / "cache");
    write_file(cache_csv, csv);
    write_file(cache_sum, sum);
  }
  std::cout << "wrote " << csv_path.string() << " (" << count_rows(a.body)
            << " rows) and " << sum_path.string() << "\n";
}

/// Depth grid covering a wavenumber range: domain depth from the slowest
/// decay at the lowest k, spacing from the shortest oscillation at the
/// highest k.
esw::DepthGrid range_grid(const esw::MaterialModel& model, const Eigen::Vector2d& x,
                          const Eigen::Vector2d& xi_hat, double k_lo, double k_hi) {
  const esw::DepthGrid deep = esw::default_grid(model, x, xi_hat, k_lo);
  const esw::DepthGrid fine = esw::default_grid(model, x, xi_hat, k_hi);
  esw::DepthGrid grid;
  grid.z_min = deep.z_min;
  grid.cells = static_cast<int>(std::ceil(-deep.z_min / fine.spacing()));
  return grid;
}

ojson grid_json(const esw::DepthGrid& grid) {
  return ojson{{"z_min", grid.z_min}, {"cells", grid.cells}};
}

// ---------------------------------------------------------------------------
// validate

int cmd_validate(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot open model file '" << path << "'\n";
    return 1;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    const esw::MaterialModel model = esw::parse_model(buf.str());
    const esw::ValidationReport rep = model.validate();
    std::cout << "ok: " << esw::symmetry_name(model.symmetry()) << ", "
              << esw::interpolation_name(model.interpolation()) << ", Z_I=" << num(model.z_i())
              << ", delta=" << num(rep.delta)
              << ", min convexity eigenvalue=" << num(rep.min_convexity_eigenvalue)
              << ", hash=" << hex16(model.content_hash()) << "\n";
    return 0;
  } catch (const esw::Error& e) {
    std::cerr << "invalid: " << e.what() << "\n";
    return 1;
  }
}

// ---------------------------------------------------------------------------
// vlimit

struct VlimitArgs {
  CommonArgs common;
  int ntheta = 0;  // 0: single angle from --theta
  double rel_tol = 1e-10;
};

void cmd_vlimit(const VlimitArgs& a) {
  const esw::MaterialModel model = esw::load_model(a.common.model_path);
  std::vector<double> thetas;
  if (a.ntheta > 0) {
    for (int i = 0; i < a.ntheta; ++i) thetas.push_back(2.0 * M_PI * i / a.ntheta);
  } else {
    thetas.push_back(a.common.theta);
  }

  ConfigKey key("vlimit");
  key.add("x1", a.common.x1).add("x2", a.common.x2).add("thetas", thetas);
  key.add("rel_tol", a.rel_tol);

  emit(a.common, "vlimit", model.content_hash(), key, [&] {
    esw::LimitingVelocityOptions opts;
    opts.rel_tol = a.rel_tol;
    std::vector<esw::InfimumVelocityResult> rows(thetas.size());
    parallel_for(static_cast<int>(thetas.size()), [&](int i) {
      const Eigen::Vector2d xi(std::cos(thetas[i]), std::sin(thetas[i]));
      rows[i] = esw::infimum_limiting_velocity(model, position(a.common), xi, opts);
    });

    Artifact art;
    art.columns = "theta,v_l_surface,v_l_interface,v_inf,z_at_min,flags";
    double v_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      std::string flags;
      if (r.minimum_at_surface) flags += "surface_min";
      if (r.decreasing_with_depth) flags += flags.empty() ? "decreasing" : ";decreasing";
      art.body += num(thetas[i]) + "," + num(r.v_l_surface) + "," + num(r.v_l_interface) +
                  "," + num(r.v_inf) + "," + num(r.z_at_min) + "," + flags + "\n";
      v_min = std::min(v_min, r.v_inf);
    }
    art.summary["angles"] = thetas.size();
    art.summary["v_inf_min"] = v_min;
    return art;
  });
}

// ---------------------------------------------------------------------------
// dispersion

struct DispersionArgs {
  CommonArgs common;
  double kmin = 0.0, kmax = 0.0;
  int nk = 0;
  int branches = 3;
  std::string family = "full";
  std::string spacing = "linear";
  double zmin = 0.0;  // grid override, used when cells > 0
  int cells = 0;
};

void cmd_dispersion(const DispersionArgs& a) {
  if (a.kmin > a.kmax) throw CLI::ValidationError("--kmin must not exceed --kmax");
  if (a.spacing != "linear" && a.spacing != "log")
    throw CLI::ValidationError("--spacing must be linear or log");
  const esw::Family family = parse_family(a.family);
  const esw::MaterialModel model = esw::load_model(a.common.model_path);

  std::vector<double> ks(a.nk);
  for (int i = 0; i < a.nk; ++i) {
    const double s = a.nk == 1 ? 0.0 : static_cast<double>(i) / (a.nk - 1);
    ks[i] = a.spacing == "log" ? a.kmin * std::pow(a.kmax / a.kmin, s)
                               : a.kmin + (a.kmax - a.kmin) * s;
  }

  const esw::DepthGrid grid =
      a.cells > 0 ? esw::DepthGrid{a.zmin, a.cells}
                  : range_grid(model, position(a.common), direction(a.common), a.kmin, a.kmax);

  ConfigKey key("dispersion");
  key.add("x1", a.common.x1).add("x2", a.common.x2).add("theta", a.common.theta);
  key.add("ks", ks).add("branches", a.branches).add("family", a.family);
  key.add("z_min", grid.z_min).add("cells", grid.cells);

  emit(a.common, "dispersion", model.content_hash(), key, [&] {
    std::vector<std::optional<esw::DispersionCurve>> curves(a.branches);
    std::vector<std::string> notes(a.branches);
    parallel_for(a.branches, [&](int b) {
      try {
        curves[b] = esw::dispersion_curve(model, position(a.common), direction(a.common),
                                          ks, b, grid, family);
      } catch (const esw::BranchAbsentError&) {
        notes[b] = "branch " + std::to_string(b) + " absent on the sampled range";
      }
    });

    Artifact art;
    art.columns = "k,branch,Lambda,phase_velocity,group_velocity,flag";
    ojson branch_info = ojson::array();
    for (int b = 0; b < a.branches; ++b) {
      if (!curves[b]) {
        branch_info.push_back(ojson{{"branch", b}, {"status", "absent"}});
        continue;
      }
      const auto& curve = *curves[b];
      for (const auto& s : curve.samples) {
        art.body += num(s.k) + "," + std::to_string(b) + "," + num(s.lambda) + "," +
                    num(s.phase_velocity) + "," + num(s.group_velocity) + "," + s.flag + "\n";
      }
      const char* status = curve.status == esw::CurveStatus::complete ? "complete"
                           : curve.status == esw::CurveStatus::branch_lost ? "lost"
                                                                           : "exhausted";
      branch_info.push_back(
          ojson{{"branch", b}, {"status", status}, {"samples", curve.samples.size()}});
    }
    art.summary["family"] = a.family;
    art.summary["grid"] = grid_json(grid);
    art.summary["branches"] = branch_info;
    ojson warn = ojson::array();
    for (const auto& n : notes)
      if (!n.empty()) warn.push_back(n);
    if (!warn.empty()) art.summary["warnings"] = warn;
    return art;
  });
}

// ---------------------------------------------------------------------------
// impedance

struct ImpedanceArgs {
  CommonArgs common;
  double vmin = 0.0, vmax = 0.0;  // 0: derived from the limiting velocity
  int nv = 50;
};

void cmd_impedance(const ImpedanceArgs& a) {
  const esw::MaterialModel model = esw::load_model(a.common.model_path);
  const Eigen::Vector2d x = position(a.common);
  const Eigen::Vector2d xi = direction(a.common);
  const esw::AcousticTriple triple = esw::acoustic_triple(model, x, xi, 0.0);
  const double v_l = esw::limiting_velocity(triple).v_l;
  const double vmin = a.vmin > 0.0 ? a.vmin : 0.05 * v_l;
  const double vmax = a.vmax > 0.0 ? a.vmax : 0.95 * v_l;
  if (vmin > vmax) throw CLI::ValidationError("--vmin must not exceed --vmax");

  ConfigKey key("impedance");
  key.add("x1", a.common.x1).add("x2", a.common.x2).add("theta", a.common.theta);
  key.add("vmin", vmin).add("vmax", vmax).add("nv", a.nv);

  emit(a.common, "impedance", model.content_hash(), key, [&] {
    std::vector<std::string> rows(a.nv);
    parallel_for(a.nv, [&](int i) {
      const double s = a.nv == 1 ? 0.0 : static_cast<double>(i) / (a.nv - 1);
      const double v = vmin + (vmax - vmin) * s;
      const esw::ImpedanceResult r = esw::impedance(triple, v);
      std::string row = num(v);
      for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 3; ++q) {
          row += "," + num(r.z(p, q).real());
          row += "," + num(r.z(p, q).imag());
        }
      Eigen::SelfAdjointEigenSolver<esw::Matrix3cd> eig(0.5 * (r.z + r.z.adjoint()));
      for (int p = 0; p < 3; ++p) row += "," + num(eig.eigenvalues()(p));
      row += "," + num(r.z.determinant().real());
      row += "," + num(r.riccati_residual);
      rows[i] = row + "\n";
    });

    Artifact art;
    art.columns = "v";
    for (int p = 1; p <= 3; ++p)
      for (int q = 1; q <= 3; ++q) {
        const std::string ij = std::to_string(p) + std::to_string(q);
        art.columns += ",z_re_" + ij + ",z_im_" + ij;
      }
    art.columns += ",eig_1,eig_2,eig_3,det,riccati_residual";
    for (const auto& row : rows) art.body += row;

    art.summary["v_l"] = v_l;
    const esw::BarnettLotheResult bl = esw::barnett_lothe(triple);
    art.summary["subsonic_wave_exists"] = bl.exists;
    art.summary["det_limit"] = bl.det_limit;
    art.summary["invariant2_limit"] = bl.invariant2_limit;
    if (bl.exists) {
      const esw::SecularRoot root = esw::secular_root(triple);
      art.summary["secular_velocity"] = root.v;
    }
    return art;
  });
}

// ---------------------------------------------------------------------------
// weyl

struct WeylArgs {
  CommonArgs common;
  double energy = 0.0;
  std::string family = "love";
  std::string klist = "10,30,100,300";
  double zmin = 0.0;
  int cells = 0;
  std::uint64_t mc_samples = 0;
  std::uint64_t seed = 42;
};

void cmd_weyl(const WeylArgs& a) {
  const esw::Family family = parse_family(a.family);
  const std::vector<double> ks = parse_list(a.klist, "--klist");
  const esw::MaterialModel model = esw::load_model(a.common.model_path);
  const Eigen::Vector2d x = position(a.common);
  const Eigen::Vector2d xi = direction(a.common);

  ConfigKey key("weyl");
  key.add("x1", a.common.x1).add("x2", a.common.x2).add("theta", a.common.theta);
  key.add("energy", a.energy).add("family", a.family).add("ks", ks);
  key.add("z_min", a.zmin).add("cells", a.cells);
  key.add("mc_samples", a.mc_samples).add("seed", a.seed);

  emit(a.common, "weyl", model.content_hash(), key, [&] {
    const esw::DepthGrid grid{a.zmin, a.cells};
    const esw::DepthGrid* grid_ptr = a.cells > 0 ? &grid : nullptr;
    const esw::WeylCheck check = esw::weyl_check(model, x, xi, a.energy, family, ks, grid_ptr);

    Artifact art;
    art.columns = "k,N,prediction,rel_error,flags";
    for (const auto& row : check.rows) {
      art.body += num(row.k) + "," + std::to_string(row.counted) + "," + num(row.predicted) +
                  "," + num(row.rel_error) + "," +
                  (check.volume.branch_tangency ? "tangency" : "") + "\n";
    }
    art.summary["family"] = a.family;
    art.summary["energy"] = a.energy;
    art.summary["area"] = check.volume.value;
    art.summary["branch_tangency"] = check.volume.branch_tangency;
    art.summary["improving"] = check.improving;
    if (a.mc_samples > 0) {
      const esw::MonteCarloVolume mc = esw::phase_space_volume_mc(
          model, x, xi, a.energy, family, a.mc_samples, a.seed);
      art.summary["mc"] = ojson{{"value", mc.value},
                                {"std_error", mc.std_error},
                                {"samples", mc.samples},
                                {"seed", a.seed},
                                {"rel_gap", std::abs(mc.value - check.volume.value) /
                                                check.volume.value}};
    }
    return art;
  });
}

// ---------------------------------------------------------------------------
// trace

struct TraceArgs {
  CommonArgs common;
  std::string family = "love";
  int branch = 0;
  std::string k_nodes;  // empty: geometric nodes around the launch wavenumber
  std::string x1_nodes, x2_nodes;
  int ntheta = 8;
  int probes = 4;
  double zmin = 0.0;
  int cells = 0;
  double k = 0.0;
  double omega = 0.0;
  double tmax = 1.0;
  double dt0 = 1e-3;
  double tol = 1e-10;
  std::string fan = "point";
};

void cmd_trace(const TraceArgs& a) {
  if ((a.k > 0.0) == (a.omega > 0.0))
    throw CLI::ValidationError("give exactly one of --k and --omega");
  if (a.fan != "point" && a.fan != "plane")
    throw CLI::ValidationError("--fan must be point or plane");
  const esw::MaterialModel model = esw::load_model(a.common.model_path);

  const double k_center = a.k > 0.0 ? a.k : a.omega;  // omega: refined after the build
  std::vector<double> ks = a.k_nodes.empty()
                               ? std::vector<double>{0.5 * k_center, 0.7071 * k_center,
                                                     k_center, 1.4142 * k_center,
                                                     2.0 * k_center}
                               : parse_list(a.k_nodes, "--k-nodes");
  std::vector<double> x1s = a.x1_nodes.empty() ? std::vector<double>{a.common.x1}
                                               : parse_list(a.x1_nodes, "--x1-nodes");
  std::vector<double> x2s = a.x2_nodes.empty() ? std::vector<double>{a.common.x2}
                                               : parse_list(a.x2_nodes, "--x2-nodes");
  std::vector<double> thetas(std::max(a.ntheta, 1));
  for (std::size_t i = 0; i < thetas.size(); ++i)
    thetas[i] = 2.0 * M_PI * i / thetas.size();

  ConfigKey key("trace");
  key.add("x1", a.common.x1).add("x2", a.common.x2).add("theta", a.common.theta);
  key.add("family", a.family).add("branch", a.branch);
  key.add("ks", ks).add("x1s", x1s).add("x2s", x2s).add("ntheta", a.ntheta);
  key.add("probes", a.probes).add("z_min", a.zmin).add("cells", a.cells);
  key.add("k", a.k).add("omega", a.omega);
  key.add("tmax", a.tmax).add("dt0", a.dt0).add("tol", a.tol).add("fan", a.fan);

  emit(a.common, "trace", model.content_hash(), key, [&] {
    esw::FieldOptions fopts;
    fopts.family = parse_family(a.family);
    fopts.branch = a.branch;
    fopts.probes = a.probes;
    if (a.cells > 0) fopts.grid = esw::DepthGrid{a.zmin, a.cells};
    const esw::HamiltonianField field =
        esw::build_hamiltonian(model, x1s, x2s, thetas, ks, fopts);

    const Eigen::Vector2d x0 = position(a.common);
    const double k0 = a.k > 0.0
                          ? a.k
                          : esw::wavenumber_for_frequency(field, x0, a.common.theta, a.omega);

    esw::TraceOptions topts;
    topts.t_max = a.tmax;
    topts.dt0 = a.dt0;
    topts.tol = a.tol;
    topts.fan = a.fan == "plane" ? esw::FanKind::plane : esw::FanKind::point;
    const esw::RayResult ray = esw::trace_ray(field, x0, a.common.theta, k0, topts);

    Artifact art;
    art.columns = "t,x1,x2,xi1,xi2,phase,tau,A0,flags";
    std::size_t caustic = 0;
    for (std::size_t i = 0; i < ray.samples.size(); ++i) {
      const auto& s = ray.samples[i];
      std::string flags;
      if (caustic < ray.caustic_times.size() && s.t >= ray.caustic_times[caustic]) {
        flags = "caustic";
        ++caustic;
      }
      if (i + 1 == ray.samples.size()) {
        if (!flags.empty()) flags += ';';
        flags += ray.stop == esw::StopReason::domain_exit ? "domain_exit" : "time_end";
      }
      art.body += num(s.t) + "," + num(s.x(0)) + "," + num(s.x(1)) + "," + num(s.xi(0)) +
                  "," + num(s.xi(1)) + "," + num(s.phase) + "," + num(s.tau) + "," +
                  num(s.a0) + "," + flags + "\n";
    }
    art.summary["k0"] = k0;
    art.summary["frequency"] = ray.h0;
    art.summary["h_drift"] = ray.h_drift;
    art.summary["stop"] = ray.stop == esw::StopReason::domain_exit ? "domain_exit" : "time_end";
    art.summary["t_ref"] = ray.t_ref;
    art.summary["samples"] = ray.samples.size();
    art.summary["caustics"] = ray.caustic_times;
    return art;
  });
}

// ---------------------------------------------------------------------------
// modes

struct ModesArgs {
  CommonArgs common;
  double epsilon = 0.0;
  int lmin = 0, lmax = 0;
  int nmax = 8;
  bool jeans = false;
  std::string type = "both";
  double zmin = 0.0;
  int cells = 0;
  bool audit = false;
};

void cmd_modes(const ModesArgs& a) {
  if (a.lmin > a.lmax) throw CLI::ValidationError("--lmin must not exceed --lmax");
  if (a.type != "both" && a.type != "toroidal" && a.type != "spheroidal")
    throw CLI::ValidationError("--type must be both, toroidal or spheroidal");
  const esw::MaterialModel model = esw::load_model(a.common.model_path);

  ConfigKey key("modes");
  key.add("x1", a.common.x1).add("x2", a.common.x2);
  key.add("epsilon", a.epsilon).add("lmin", a.lmin).add("lmax", a.lmax);
  key.add("nmax", a.nmax).add("jeans", a.jeans).add("type", a.type);
  key.add("z_min", a.zmin).add("cells", a.cells).add("audit", a.audit);

  emit(a.common, "modes", model.content_hash(), key, [&] {
    esw::ModeOptions opts;
    opts.jeans = a.jeans;
    opts.n_max = a.nmax;
    opts.toroidal = a.type != "spheroidal";
    opts.spheroidal = a.type != "toroidal";
    if (a.cells > 0) opts.grid = esw::DepthGrid{a.zmin, a.cells};
    const esw::ModeCatalog catalog =
        esw::mode_catalog(model, position(a.common), a.epsilon, a.lmin, a.lmax, opts);

    Artifact art;
    art.columns = "type,n,l,k,omega,degeneracy";
    std::size_t toroidal = 0;
    for (const auto& e : catalog.entries) {
      const bool is_t = e.type == esw::ModeType::toroidal;
      toroidal += is_t ? 1 : 0;
      art.body += std::string(is_t ? "toroidal" : "spheroidal") + "," + std::to_string(e.n) +
                  "," + std::to_string(e.l) + "," + num(e.k) + "," + num(e.omega) + "," +
                  std::to_string(e.degeneracy) + "\n";
    }
    art.summary["epsilon"] = a.epsilon;
    art.summary["jeans"] = a.jeans;
    art.summary["l_min"] = a.lmin;
    art.summary["l_max"] = a.lmax;
    art.summary["entries"] = catalog.entries.size();
    art.summary["toroidal"] = toroidal;
    art.summary["spheroidal"] = catalog.entries.size() - toroidal;
    if (a.audit) {
      const esw::ModeCheck check =
          esw::asymptotic_mode_check(model, position(a.common), catalog, opts);
      art.summary["audit"] = ojson{
          {"max_quantization_residual", check.max_quantization_residual},
          {"omega_monotone_in_l", check.omega_monotone_in_l},
          {"compared", check.compared}};
    }
    return art;
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Elastic surface wave toolkit"};
  app.require_subcommand(1);

  std::string validate_path;
  CLI::App* validate = app.add_subcommand("validate", "check a model file");
  validate->add_option("model", validate_path, "model JSON file")->required();

  VlimitArgs vl;
  CLI::App* vlimit = app.add_subcommand("vlimit", "limiting velocity over depth and angle");
  add_common(vlimit, vl.common);
  vlimit->add_option("--ntheta", vl.ntheta, "sweep this many angles over the circle");
  vlimit->add_option("--rel-tol", vl.rel_tol, "bisection tolerance")
      ->check(CLI::PositiveNumber);

  DispersionArgs di;
  CLI::App* dispersion = app.add_subcommand("dispersion", "dispersion curves over a k range");
  add_common(dispersion, di.common);
  dispersion->add_option("--kmin", di.kmin, "lowest wavenumber")
      ->required()
      ->check(CLI::PositiveNumber);
  dispersion->add_option("--kmax", di.kmax, "highest wavenumber")
      ->required()
      ->check(CLI::PositiveNumber);
  dispersion->add_option("--nk", di.nk, "number of wavenumber samples")
      ->required()
      ->check(CLI::PositiveNumber);
  dispersion->add_option("--branches", di.branches, "branches to follow (default 3)")
      ->check(CLI::PositiveNumber);
  dispersion->add_option("--family", di.family, "full, love or rayleigh");
  dispersion->add_option("--spacing", di.spacing, "linear or log (default linear)");
  dispersion->add_option("--zmin", di.zmin, "grid override: bottom depth");
  dispersion->add_option("--cells", di.cells, "grid override: cell count");

  ImpedanceArgs im;
  CLI::App* impedance = app.add_subcommand("impedance", "surface impedance over a velocity grid");
  add_common(impedance, im.common);
  impedance->add_option("--vmin", im.vmin, "lowest velocity (default 0.05 v_L)");
  impedance->add_option("--vmax", im.vmax, "highest velocity (default 0.95 v_L)");
  impedance->add_option("--nv", im.nv, "number of velocity samples (default 50)")
      ->check(CLI::PositiveNumber);

  WeylArgs we;
  CLI::App* weyl = app.add_subcommand("weyl", "eigenvalue count against the area law");
  add_common(weyl, we.common);
  weyl->add_option("--energy", we.energy, "energy level in velocity squared units")
      ->required()
      ->check(CLI::PositiveNumber);
  weyl->add_option("--family", we.family, "full, love or rayleigh (default love)");
  weyl->add_option("--klist", we.klist, "comma separated wavenumbers (default 10,30,100,300)");
  weyl->add_option("--zmin", we.zmin, "grid override: bottom depth");
  weyl->add_option("--cells", we.cells, "grid override: cell count");
  weyl->add_option("--mc-samples", we.mc_samples, "Monte Carlo cross check sample count");
  weyl->add_option("--seed", we.seed, "Monte Carlo seed (default 42)");

  TraceArgs tr;
  CLI::App* trace = app.add_subcommand("trace", "integrate a surface ray");
  add_common(trace, tr.common);
  trace->add_option("--family", tr.family, "full, love or rayleigh (default love)");
  trace->add_option("--branch", tr.branch, "dispersion branch (default 0)");
  trace->add_option("--k-nodes", tr.k_nodes, "comma separated wavenumber nodes");
  trace->add_option("--x1-nodes", tr.x1_nodes, "comma separated lateral nodes");
  trace->add_option("--x2-nodes", tr.x2_nodes, "comma separated lateral nodes");
  trace->add_option("--ntheta", tr.ntheta, "angle nodes over the circle (default 8)")
      ->check(CLI::PositiveNumber);
  trace->add_option("--probes", tr.probes, "field cross validation solves (default 4)");
  trace->add_option("--zmin", tr.zmin, "solver grid override: bottom depth");
  trace->add_option("--cells", tr.cells, "solver grid override: cell count");
  trace->add_option("--k", tr.k, "launch wavenumber");
  trace->add_option("--omega", tr.omega, "launch frequency (alternative to --k)");
  trace->add_option("--tmax", tr.tmax, "integration time (default 1)")
      ->check(CLI::PositiveNumber);
  trace->add_option("--dt0", tr.dt0, "initial step (default 1e-3)")->check(CLI::PositiveNumber);
  trace->add_option("--tol", tr.tol, "local error target (default 1e-10)")
      ->check(CLI::PositiveNumber);
  trace->add_option("--fan", tr.fan, "paraxial fan: point or plane (default point)");

  ModesArgs mo;
  CLI::App* modes = app.add_subcommand("modes", "normal mode catalog of the closed body");
  add_common(modes, mo.common);
  modes->add_option("--epsilon", mo.epsilon, "inverse body radius")
      ->required()
      ->check(CLI::PositiveNumber);
  modes->add_option("--lmin", mo.lmin, "lowest degree")->required()->check(CLI::PositiveNumber);
  modes->add_option("--lmax", mo.lmax, "highest degree")->required()->check(CLI::PositiveNumber);
  modes->add_option("--nmax", mo.nmax, "overtones per degree (default 8)")
      ->check(CLI::PositiveNumber);
  modes->add_flag("--jeans", mo.jeans, "use k = eps (l + 1/2) instead of eps sqrt(l(l+1))");
  modes->add_option("--type", mo.type, "both, toroidal or spheroidal (default both)");
  modes->add_option("--zmin", mo.zmin, "grid override: bottom depth");
  modes->add_option("--cells", mo.cells, "grid override: cell count");
  modes->add_flag("--audit", mo.audit, "recompute and compare every cataloged frequency");

  int rc = 0;
  validate->callback([&] { rc = cmd_validate(validate_path); });
  vlimit->callback([&] { cmd_vlimit(vl); });
  dispersion->callback([&] { cmd_dispersion(di); });
  impedance->callback([&] { cmd_impedance(im); });
  weyl->callback([&] { cmd_weyl(we); });
  trace->callback([&] { cmd_trace(tr); });
  modes->callback([&] { cmd_modes(mo); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);  // help and version requests
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << "\n";
    return 64;
  } catch (const esw::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const esw::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const esw::OutOfDomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const esw::SymmetryMismatchError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const esw::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
