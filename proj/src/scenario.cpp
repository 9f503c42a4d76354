#include "tpflow/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tpflow/units.hpp"

namespace tpf {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Line {
  std::vector<std::string> tok;
  int no = 0;
  size_t pos = 0;

  [[noreturn]] void fail(const std::string& what) const {
    std::ostringstream os;
    os << "config line " << no << " (" << (tok.empty() ? "?" : tok[0])
       << "): " << what;
    throw ConfigError(os.str());
  }
  bool done() const { return pos >= tok.size(); }
  std::string next(const char* what) {
    if (done()) fail(std::string("missing ") + what);
    return tok[pos++];
  }
  std::string peek() const { return done() ? "" : tok[pos]; }
  double num(const char* what) {
    const std::string s = next(what);
    size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size()) fail(std::string("expected number for ") + what +
                               ", got '" + s + "'");
    return v;
  }
  int integer(const char* what) {
    const double v = num(what);
    if (v != std::floor(v)) fail(std::string(what) + " must be an integer");
    return static_cast<int>(v);
  }
  /// number followed by a unit token, converted to SI
  double quantity(const char* what, const char* def_unit) {
    const double v = num(what);
    std::string unit = def_unit;
    if (!done()) unit = tok[pos++];
    try {
      return to_si(v, unit);
    } catch (const std::exception& ex) {
      fail(ex.what());
    }
  }
};

using Pred = std::function<bool(const Vec2&)>;

struct BcDirective {
  Pred pred;
  BoundaryData data;
};

struct Builder {
  std::string dir;
  Scenario s;
  std::vector<std::string> canon;
  std::vector<BcDirective> bcs;

  bool have_domain = false, have_mesh = false;

  std::string resolve(const std::string& path) const {
    if (!path.empty() && path[0] == '/') return path;
    return dir + "/" + path;
  }

  double tol() const { return 1e-9 * std::max(s.Lx, s.Ly); }

  void need_mesh(Line& ln) const {
    if (!have_mesh) ln.fail("requires domain and mesh to be set first");
  }

  Pred side(const std::string& name, Line& ln) const {
    const double t = tol();
    const double Lx = s.Lx, Ly = s.Ly;
    if (name == "left") return [t](const Vec2& x) { return x.x() < t; };
    if (name == "right")
      return [t, Lx](const Vec2& x) { return x.x() > Lx - t; };
    if (name == "bottom") return [t](const Vec2& x) { return x.y() < t; };
    if (name == "top") return [t, Ly](const Vec2& x) { return x.y() > Ly - t; };
    if (name == "all") return [](const Vec2&) { return true; };
    ln.fail("unknown boundary region '" + name + "'");
  }
};

void parse_bc(Builder& b, Line& ln) {
  b.need_mesh(ln);
  const std::string where = ln.next("boundary region");
  Pred pred;
  std::string where_canon = where;
  if (where == "box") {
    const double x0 = ln.num("x0"), y0 = ln.num("y0");
    const double x1 = ln.num("x1"), y1 = ln.num("y1");
    const double t = b.tol();
    pred = [=](const Vec2& x) {
      return x.x() > x0 - t && x.x() < x1 + t && x.y() > y0 - t &&
             x.y() < y1 + t;
    };
    where_canon = "box " + fmt(x0) + " " + fmt(y0) + " " + fmt(x1) + " " +
                  fmt(y1);
  } else if (where == "rest") {
    std::vector<Pred> prev;
    for (const auto& d : b.bcs) prev.push_back(d.pred);
    pred = [prev](const Vec2& x) {
      for (const auto& p : prev)
        if (p(x)) return false;
      return true;
    };
  } else {
    pred = b.side(where, ln);
  }

  // total length of the boundary edges this directive covers
  double covered = 0.0;
  for (int e = 0; e < b.s.mesh.n_edges(); ++e)
    if (b.s.mesh.is_boundary(e) && pred(b.s.mesh.edges[e].midpoint))
      covered += b.s.mesh.edges[e].length;
  if (covered <= 0.0) ln.fail("boundary region covers no boundary edges");

  BoundaryData data;
  std::string kind_canon;
  const std::string kind = ln.next("boundary kind");
  if (kind == "noflow") {
    data.kind = BcKind::Neumann;
    kind_canon = "noflow";
  } else if (kind == "flux") {
    data.kind = BcKind::Neumann;
    data.flux_t = ln.quantity("flux density", "m/s");
    kind_canon = "flux " + fmt(data.flux_t) + " m/s";
  } else if (kind == "inflow_rate") {
    data.kind = BcKind::Neumann;
    const double rate = ln.quantity("volume rate", "m3/day");
    data.flux_t = -rate / covered; // into the domain, uniform density
    kind_canon = "flux " + fmt(data.flux_t) + " m/s";
  } else if (kind == "pressure") {
    data.kind = BcKind::Dirichlet;
    data.pw = data.pn = ln.quantity("pressure", "bar");
    kind_canon = "pressure_wn " + fmt(data.pw) + " " + fmt(data.pn) + " Pa";
  } else if (kind == "pressure_wn") {
    data.kind = BcKind::Dirichlet;
    data.pw = ln.num("wetting pressure");
    data.pn = ln.num("non-wetting pressure");
    const std::string unit = ln.next("pressure unit");
    data.pw = to_si(data.pw, unit);
    data.pn = to_si(data.pn, unit);
    kind_canon = "pressure_wn " + fmt(data.pw) + " " + fmt(data.pn) + " Pa";
  } else {
    ln.fail("unknown boundary kind '" + kind + "'");
  }
  if (ln.peek() == "sw") {
    ln.next("sw");
    data.has_sw = true;
    data.sw = ln.num("boundary saturation");
    if (data.sw < 0.0 || data.sw > 1.0)
      ln.fail("boundary saturation outside [0, 1]");
    kind_canon += " sw " + fmt(data.sw);
  }
  b.bcs.push_back({pred, data});
  b.canon.push_back("bc " + where_canon + " " + kind_canon);
}

void apply_box(const Mesh& mesh, double x0, double y0, double x1, double y1,
               double v, std::vector<double>& out) {
  for (int i = 0; i < mesh.n_cells(); ++i) {
    const Vec2& c = mesh.cells[i].centroid;
    if (c.x() >= x0 && c.x() <= x1 && c.y() >= y0 && c.y() <= y1) out[i] = v;
  }
}

} // namespace

Eigen::VectorXd load_permeability_raster(std::istream& in, int nx, int ny,
                                         bool log10_mapping) {
  std::vector<double> vals;
  double v;
  while (in >> v) vals.push_back(v);
  if (static_cast<int>(vals.size()) != nx * ny)
    throw ConfigError("permeability raster holds " +
                      std::to_string(vals.size()) + " values, expected " +
                      std::to_string(nx * ny));
  Eigen::VectorXd K(2 * nx * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      double k = vals[j * nx + i]; // first raster row is the bottom row
      if (log10_mapping) k = std::pow(10.0, k);
      if (!(k > 0.0))
        throw ConfigError("nonpositive permeability in raster at row " +
                          std::to_string(j) + ", column " + std::to_string(i));
      K[2 * (j * nx + i)] = k;
      K[2 * (j * nx + i) + 1] = k;
    }
  return K;
}

Scenario parse_scenario(std::istream& in, const std::string& dir) {
  Builder b;
  b.dir = dir;
  Scenario& s = b.s;
  s.rock.beta = 2;
  s.rock.S_rw = s.rock.S_rn = 1e-6;
  s.rock.eps_s = 1e-3;
  s.fluids.g = 0.0;

  double phi = 0.2;
  double Bc = 0.0;
  std::vector<double> Kcell; // m2
  std::vector<double> Sw0;
  std::vector<double> Fw, Fn;

  std::string raw;
  int line_no = 0;
  bool have_dt = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    Line ln;
    ln.no = line_no;
    std::istringstream ts(raw);
    std::string t;
    while (ts >> t) ln.tok.push_back(t);
    if (ln.tok.empty()) continue;
    const std::string key = ln.next("key");

    if (key == "domain") {
      s.Lx = ln.num("Lx");
      s.Ly = ln.num("Ly");
      std::string unit = "m";
      if (!ln.done()) unit = ln.next("unit");
      s.Lx = to_si(s.Lx, unit);
      s.Ly = to_si(s.Ly, unit);
      if (!(s.Lx > 0.0) || !(s.Ly > 0.0)) ln.fail("domain must be positive");
      b.have_domain = true;
      b.canon.push_back("domain " + fmt(s.Lx) + " " + fmt(s.Ly) + " m");
    } else if (key == "mesh") {
      if (!b.have_domain) ln.fail("domain must be set before mesh");
      s.nx = ln.integer("nx");
      s.ny = ln.integer("ny");
      s.mesh = build_structured(s.nx, s.ny, s.Lx, s.Ly);
      b.have_mesh = true;
      Kcell.assign(s.mesh.n_cells(), to_si(50.0, "md"));
      Sw0.assign(s.mesh.n_cells(), 0.0);
      Fw.assign(s.mesh.n_cells(), 0.0);
      Fn.assign(s.mesh.n_cells(), 0.0);
      b.canon.push_back("mesh " + std::to_string(s.nx) + " " +
                        std::to_string(s.ny));
    } else if (key == "rho_w" || key == "rho_n") {
      (key == "rho_w" ? s.fluids.rho_w : s.fluids.rho_n) =
          ln.quantity("density", "kg/m3");
      b.canon.push_back(key + " " +
                        fmt(key == "rho_w" ? s.fluids.rho_w : s.fluids.rho_n) +
                        " kg/m3");
    } else if (key == "mu_w" || key == "mu_n") {
      double& mu = key == "mu_w" ? s.fluids.mu_w : s.fluids.mu_n;
      mu = ln.quantity("viscosity", "cP");
      if (!(mu > 0.0)) ln.fail(key + " must be positive");
      b.canon.push_back(key + " " + fmt(mu) + " Pa.s");
    } else if (key == "gravity") {
      s.fluids.g = ln.quantity("gravity", "m/s2");
      b.canon.push_back("gravity " + fmt(s.fluids.g) + " m/s2");
    } else if (key == "grad_z") {
      s.fluids.grad_z.x() = ln.num("x component");
      s.fluids.grad_z.y() = ln.num("y component");
      b.canon.push_back("grad_z " + fmt(s.fluids.grad_z.x()) + " " +
                        fmt(s.fluids.grad_z.y()));
    } else if (key == "porosity") {
      phi = ln.num("porosity");
      if (!(phi > 0.0) || phi > 1.0) ln.fail("porosity must be in (0, 1]");
      b.canon.push_back("porosity " + fmt(phi));
    } else if (key == "beta") {
      s.rock.beta = ln.integer("exponent");
      if (s.rock.beta < 1) ln.fail("beta must be >= 1");
      b.canon.push_back("beta " + std::to_string(s.rock.beta));
    } else if (key == "Bc") {
      Bc = ln.quantity("capillary strength", "bar.md^1/2");
      if (Bc < 0.0) ln.fail("Bc must be nonnegative");
      b.canon.push_back("Bc " + fmt(Bc) + " Pa.m");
    } else if (key == "eps_s") {
      s.rock.eps_s = ln.num("clamp");
      if (!(s.rock.eps_s > 0.0) || s.rock.eps_s >= 1.0)
        ln.fail("eps_s must be in (0, 1)");
      b.canon.push_back("eps_s " + fmt(s.rock.eps_s));
    } else if (key == "S_r") {
      s.rock.S_rw = s.rock.S_rn = ln.num("residual saturation");
      b.canon.push_back("S_r " + fmt(s.rock.S_rw));
    } else if (key == "perm") {
      b.need_mesh(ln);
      const std::string mode = ln.next("perm mode");
      if (mode == "uniform") {
        const double k = ln.quantity("permeability", "md");
        if (!(k > 0.0)) ln.fail("permeability must be positive");
        Kcell.assign(s.mesh.n_cells(), k);
        b.canon.push_back("perm uniform " + fmt(k) + " m2");
      } else if (mode == "box") {
        const double x0 = ln.num("x0"), y0 = ln.num("y0");
        const double x1 = ln.num("x1"), y1 = ln.num("y1");
        const double k = ln.quantity("permeability", "md");
        if (!(k > 0.0)) ln.fail("permeability must be positive");
        apply_box(s.mesh, x0, y0, x1, y1, k, Kcell);
        b.canon.push_back("perm box " + fmt(x0) + " " + fmt(y0) + " " +
                          fmt(x1) + " " + fmt(y1) + " " + fmt(k) + " m2");
      } else if (mode == "raster") {
        const std::string path = ln.next("raster path");
        const std::string mapping = ln.next("mapping");
        if (mapping != "linear" && mapping != "log10")
          ln.fail("mapping must be linear or log10");
        const std::string unit = ln.done() ? "md" : ln.next("unit");
        const std::string full = b.resolve(path);
        std::ifstream rf(full);
        if (!rf) ln.fail("cannot open raster file " + full);
        Eigen::VectorXd K;
        try {
          K = load_permeability_raster(rf, s.nx, s.ny, mapping == "log10");
        } catch (const std::exception& ex) {
          ln.fail(ex.what());
        }
        const double scale = to_si(1.0, unit);
        for (int i = 0; i < K.size(); ++i) Kcell[i] = K[i] * scale;
        // canonical form carries the resolved path so the echo re-parses
        // from any working directory
        b.canon.push_back("perm raster " + full + " " + mapping + " " + unit);
      } else {
        ln.fail("unknown perm mode '" + mode + "'");
      }
    } else if (key == "init_sw") {
      b.need_mesh(ln);
      const double v = ln.num("saturation");
      if (v < 0.0 || v > 1.0) ln.fail("initial saturation outside [0, 1]");
      Sw0.assign(s.mesh.n_cells(), v);
      b.canon.push_back("init_sw " + fmt(v));
    } else if (key == "init_box") {
      b.need_mesh(ln);
      const double x0 = ln.num("x0"), y0 = ln.num("y0");
      const double x1 = ln.num("x1"), y1 = ln.num("y1");
      const double v = ln.num("saturation");
      if (v < 0.0 || v > 1.0) ln.fail("initial saturation outside [0, 1]");
      apply_box(s.mesh, x0, y0, x1, y1, v, Sw0);
      b.canon.push_back("init_box " + fmt(x0) + " " + fmt(y0) + " " + fmt(x1) +
                        " " + fmt(y1) + " " + fmt(v));
    } else if (key == "source_w" || key == "source_n") {
      b.need_mesh(ln);
      if (ln.next("source mode") != "box") ln.fail("only box sources exist");
      const double x0 = ln.num("x0"), y0 = ln.num("y0");
      const double x1 = ln.num("x1"), y1 = ln.num("y1");
      const double rate = ln.quantity("volume rate", "m3/day");
      double area = 0.0;
      for (int i = 0; i < s.mesh.n_cells(); ++i) {
        const Vec2& c = s.mesh.cells[i].centroid;
        if (c.x() >= x0 && c.x() <= x1 && c.y() >= y0 && c.y() <= y1)
          area += s.mesh.cells[i].area;
      }
      if (area <= 0.0) ln.fail("source box covers no cells");
      auto& F = key == "source_w" ? Fw : Fn;
      for (int i = 0; i < s.mesh.n_cells(); ++i) {
        const Vec2& c = s.mesh.cells[i].centroid;
        if (c.x() >= x0 && c.x() <= x1 && c.y() >= y0 && c.y() <= y1)
          F[i] += rate / area;
      }
      b.canon.push_back(key + " box " + fmt(x0) + " " + fmt(y0) + " " +
                        fmt(x1) + " " + fmt(y1) + " " + fmt(rate) + " m3/day");
    } else if (key == "bc") {
      parse_bc(b, ln);
    } else if (key == "scheme") {
      const std::string name = ln.next("scheme name");
      if (name == "pimpes") s.cfg.scheme = Scheme::PIMPES;
      else if (name == "hfimpes") s.cfg.scheme = Scheme::HFIMPES;
      else if (name == "stdimpes") s.cfg.scheme = Scheme::STDIMPES;
      else ln.fail("unknown scheme '" + name + "'");
      b.canon.push_back("scheme " + name);
    } else if (key == "dt") {
      s.cfg.dt = ln.quantity("step size", "day");
      if (!(s.cfg.dt > 0.0)) ln.fail("dt must be positive");
      have_dt = true;
      b.canon.push_back("dt " + fmt(s.cfg.dt) + " s");
    } else if (key == "adaptive") {
      const std::string v = ln.next("on|off");
      if (v != "on" && v != "off") ln.fail("adaptive must be on or off");
      s.cfg.adaptive = v == "on";
      b.canon.push_back("adaptive " + v);
    } else if (key == "cfl_target") {
      s.cfg.cfl_target = ln.num("CFL target");
      if (!(s.cfg.cfl_target > 0.0)) ln.fail("cfl_target must be positive");
      b.canon.push_back("cfl_target " + fmt(s.cfg.cfl_target));
    } else if (key == "dt_min" || key == "dt_max") {
      double& v = key == "dt_min" ? s.cfg.dt_min : s.cfg.dt_max;
      v = ln.quantity("step size", "day");
      if (!(v > 0.0)) ln.fail(key + " must be positive");
      b.canon.push_back(key + " " + fmt(v) + " s");
    } else if (key == "max_steps") {
      s.cfg.max_steps = ln.integer("step count");
      if (s.cfg.max_steps < 0) ln.fail("max_steps must be >= 0");
      b.canon.push_back("max_steps " + std::to_string(s.cfg.max_steps));
    } else if (key == "end_time") {
      s.cfg.end_time = ln.quantity("end time", "day");
      b.canon.push_back("end_time " + fmt(s.cfg.end_time) + " s");
    } else if (key == "bounds") {
      const std::string v = ln.next("clamp|record");
      if (v == "clamp") s.cfg.policy = BoundsPolicy::Clamp;
      else if (v == "record") s.cfg.policy = BoundsPolicy::RecordOnly;
      else ln.fail("bounds must be clamp or record");
      b.canon.push_back("bounds " + v);
    } else if (key == "pin_pressure") {
      s.cfg.pin_pressure = ln.quantity("pressure", "bar");
      b.canon.push_back("pin_pressure " + fmt(s.cfg.pin_pressure) + " Pa");
    } else if (key == "output_every") {
      s.output_every = ln.integer("step count");
      if (s.output_every < 0) ln.fail("output_every must be >= 0");
      b.canon.push_back("output_every " + std::to_string(s.output_every));
    } else if (key == "output_dir") {
      s.output_dir = ln.next("path");
      b.canon.push_back("output_dir " + s.output_dir);
    } else {
      ln.fail("unknown key");
    }
    if (!ln.done()) ln.fail("trailing tokens after '" + ln.peek() + "'");
  }

  if (!b.have_mesh) throw ConfigError("config never declares domain and mesh");
  if (b.bcs.empty()) throw ConfigError("config declares no boundary conditions");
  if (s.cfg.max_steps == 0 && s.cfg.end_time <= 0.0)
    throw ConfigError("config must set max_steps or end_time");
  if (!s.cfg.adaptive && !have_dt)
    throw ConfigError("config must set dt (or adaptive on)");

  BoundarySpec spec;
  for (const auto& d : b.bcs) spec.emplace_back(d.pred, d.data);
  try {
    tag_boundary(s.mesh, spec);
  } catch (const std::exception& ex) {
    throw ConfigError(ex.what());
  }

  s.rock.phi.assign(s.mesh.n_cells(), phi);
  s.rock.K = Kcell;
  s.rock.Bc = Bc;
  s.Sw0 = Eigen::Map<Eigen::VectorXd>(Sw0.data(), Sw0.size());
  s.Fw_density = Eigen::Map<Eigen::VectorXd>(Fw.data(), Fw.size());
  s.Fn_density = Eigen::Map<Eigen::VectorXd>(Fn.data(), Fn.size());

  std::ostringstream os;
  for (const auto& l : b.canon) os << l << "\n";
  s.canonical = os.str();
  return s;
}

Scenario parse_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  const size_t slash = path.find_last_of('/');
  const std::string dir = slash == std::string::npos ? "." : path.substr(0, slash);
  return parse_scenario(in, dir);
}

Scenario relabeled(const Scenario& s) {
  Scenario r = s;
  std::swap(r.fluids.rho_w, r.fluids.rho_n);
  std::swap(r.fluids.mu_w, r.fluids.mu_n);
  std::swap(r.rock.S_rw, r.rock.S_rn);
  r.rock.mirrored = !r.rock.mirrored;
  r.Sw0 = Eigen::VectorXd::Ones(s.Sw0.size()) - s.Sw0;
  r.Fw_density = s.Fn_density;
  r.Fn_density = s.Fw_density;
  for (auto& bd : r.mesh.bcs) {
    std::swap(bd.pw, bd.pn);
    if (bd.has_sw) bd.sw = 1.0 - bd.sw;
  }
  r.canonical.clear(); // derived scenario, not a parse product
  return r;
}

} // namespace tpf
