#pragma once

// Command-line front end.  run() is the whole program: it parses argv,
// loads a catalog scenario or a config file, dispatches to the requested
// engine, and serializes the result.  Kept in the library so tests can
// drive it in-process.
//
// Exit codes: 0 success, 1 usage or validation problem, 2 numerical failure.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hidyn/config.hpp"
#include "hidyn/integrate.hpp"
#include "hidyn/io.hpp"
#include "hidyn/layer.hpp"
#include "hidyn/regularize.hpp"
#include "hidyn/scenarios.hpp"
#include "hidyn/sigmoid.hpp"

namespace hidyn::cli {

inline constexpr const char* kVersion = "0.1.0";

namespace detail {

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Loaded {
  SwitchedSystem system;
  std::vector<double> x0;
  double t0 = 0.0;
  double t1 = 1.0;
  std::vector<double> probe_x;
  double probe_t = 0.0;
  std::string label;
};

inline Loaded load_source(const std::string& scenario, const std::string& config) {
  if (scenario.empty() == config.empty())
    throw UsageError("give exactly one of --scenario or --config");
  if (!scenario.empty()) {
    const Scenario& s = find_scenario(scenario);
    return {s.system, s.x0, s.t0, s.t1, s.layer_probe_x, s.layer_probe_t, s.name};
  }
  std::ifstream is(config);
  if (!is) throw UsageError("cannot read '" + config + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  ParsedConfig c = parse_config(ss.str());
  // A config has no designated layer probe; analyses default to x0 at t0.
  return {std::move(c.system), c.x0, c.t0, c.t1, c.x0, c.t0, config};
}

template <class Fn>
void with_output(const std::string& path, std::ostream& fallback, Fn&& fn) {
  if (path.empty()) {
    fn(fallback);
    return;
  }
  std::ofstream os(path);
  if (!os) throw UsageError("cannot open '" + path + "' for writing");
  fn(os);
}

inline Trajectory thin(const Trajectory& traj, long stride) {
  if (stride <= 1 || traj.empty()) return traj;
  Trajectory out(traj.dim());
  for (std::size_t i = 0; i < traj.size(); ++i)
    if (i % static_cast<std::size_t>(stride) == 0 || i + 1 == traj.size())
      out.push(traj.t(i), traj.x(i), traj.lam(i), traj.mode(i));
  for (const Event& e : traj.events()) out.add_event(e.t, e.kind);
  return out;
}

inline std::string root_json(const SlidingRoot& r) {
  return "{\"lambda\": " + format_double(r.lam_star) +
         ", \"stability\": " + json_quote(to_string(r.stability)) +
         ", \"df1_dlam\": " + format_double(r.df1_dlam) + "}";
}

inline std::string decision_json(const PassageDecision& d) {
  return "{\"kind\": " + json_quote(to_string(d.kind)) +
         ", \"exit_side\": " + std::to_string(d.exit_side) +
         ", \"root\": " + (d.root ? root_json(*d.root) : "null") + "}";
}

// State linearly interpolated at time t; clamps outside the sampled range.
inline void interp_state(const Trajectory& tr, double t, std::vector<double>& out) {
  auto ts = tr.times();
  if (ts.size() < 2) {
    auto a = tr.x(0);
    out.assign(a.begin(), a.end());
    return;
  }
  const double* lo = ts.data();
  const double* hi = lo + ts.size();
  const double* p = std::upper_bound(lo, hi, t);
  if (p == lo) p = lo + 1;
  if (p == hi) p = hi - 1;
  std::size_t j = static_cast<std::size_t>(p - lo);
  double t0 = ts[j - 1], t1 = ts[j];
  double w = t1 > t0 ? (t - t0) / (t1 - t0) : 0.0;
  w = std::clamp(w, 0.0, 1.0);
  auto a = tr.x(j - 1), b = tr.x(j);
  out.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (1.0 - w) * a[i] + w * b[i];
}

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"piecewise-smooth dynamics with nonlinear switching terms"};
  app.name("hidyn");
  app.require_subcommand(1);

  std::string scenario, config, out_path, engine = "pws", sigmoid_name = "tanh",
                                 format = "csv";
  double eps = 1e-3, step = 0.0, t_end = 0.0, kappa = 0.0, t_point = 0.0;
  long long seed = 1, stride = 0, runs = 200;
  std::vector<double> kappas, steps, x_point;

  auto add_source = [&](CLI::App* sub) {
    auto* a = sub->add_option("--scenario", scenario, "catalog scenario name");
    auto* b = sub->add_option("--config", config, "system definition file")
                  ->check(CLI::ExistingFile);
    a->excludes(b);
    b->excludes(a);
  };
  auto add_smooth_opts = [&](CLI::App* sub) {
    sub->add_option("--eps", eps, "sigmoid width (default 1e-3)");
    sub->add_option("--sigmoid", sigmoid_name, "sigmoid kind (default tanh)")
        ->check(CLI::IsMember({"tanh", "arctan", "hill", "alg", "bump"}));
  };

  CLI::App* sim = app.add_subcommand("simulate", "integrate and write the trajectory");
  add_source(sim);
  add_smooth_opts(sim);
  sim->add_option("--engine", engine, "pws | smooth | stochastic (default pws)")
      ->check(CLI::IsMember({"pws", "smooth", "stochastic"}));
  auto* sim_step = sim->add_option(
      "--step", step, "Euler step for smooth/stochastic (default 1e-4); initial step for pws");
  auto* sim_tend = sim->add_option("--t-end", t_end, "override the horizon");
  sim->add_option("--kappa", kappa, "noise amplitude for the stochastic engine (default 0)");
  sim->add_option("--seed", seed, "noise seed (default 1)");
  sim->add_option("--stride", stride, "keep every k-th sample (default: auto)");
  sim->add_option("--out", out_path, "output path")->required();
  sim->add_option("--format", format, "csv | json (default csv)")
      ->check(CLI::IsMember({"csv", "json"}));

  CLI::App* ana = app.add_subcommand("analyze-layer", "switching-layer report at a point");
  add_source(ana);
  auto* ana_x = ana->add_option("--x", x_point, "state, comma-separated")->delimiter(',');
  auto* ana_t = ana->add_option("--t", t_point, "time (default: scenario probe time)");
  ana->add_option("--out", out_path, "output path (default: stdout)");

  CLI::App* swp = app.add_subcommand("sweep", "washout or step-refinement studies");
  add_source(swp);
  add_smooth_opts(swp);
  swp->add_option("--engine", engine, "accepted for symmetry; the mode picks the engine")
      ->check(CLI::IsMember({"pws", "smooth", "stochastic"}));
  swp->add_option("--kappas", kappas, "noise amplitudes: Monte Carlo washout table")
      ->delimiter(',');
  swp->add_option("--steps", steps, "Euler steps: per-step layer-transit tables")
      ->delimiter(',');
  swp->add_option("--runs", runs, "Monte Carlo runs per kappa (default 200)");
  swp->add_option("--seed", seed, "base seed (default 1)");
  auto* swp_step = swp->add_option("--step", step, "Euler substep for washout (default 1e-4)");
  auto* swp_tend =
      swp->add_option("--t-end", t_end, "washout horizon (default 1) or transit horizon");
  swp->add_option("--stride", stride, "keep every k-th transit sample");
  swp->add_option("--out", out_path, "output path (default: stdout)");

  CLI::App* lst = app.add_subcommand("list-scenarios", "print the scenario catalog");

  CLI::App* dec =
      app.add_subcommand("decompose", "print the fplus/fminus/g split of a system");
  add_source(dec);
  dec->add_option("--out", out_path, "output path (default: stdout)");

  std::vector<const char*> argv;
  argv.push_back("hidyn");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (lst->parsed()) {
      for (const Scenario& s : catalog()) {
        out << s.name;
        for (std::size_t i = s.name.size(); i < 22; ++i) out << ' ';
        out << s.description << '\n';
      }
      return 0;
    }

    detail::Loaded src = detail::load_source(scenario, config);
    const int n = src.system.n;

    if (sim->parsed()) {
      double t1 = sim_tend->count() ? t_end : src.t1;
      if (!(t1 > src.t0)) throw detail::UsageError("t-end must exceed the start time");
      Sigmoid sg{*sigmoid_kind_from_name(sigmoid_name), eps, 1.0};

      Trajectory traj(n);
      std::vector<std::pair<std::string, std::string>> meta{
          {"version", json_quote(kVersion)},
          {"source", json_quote(src.label)},
          {"engine", json_quote(engine)},
          {"t0", format_double(src.t0)},
          {"t1", format_double(t1)},
      };
      if (engine == "pws") {
        IntegratorConfig cfg;
        if (sim_step->count()) cfg.step = step;
        traj = detail::thin(simulate(src.system, src.x0, src.t0, t1, cfg), stride);
        meta.insert(meta.end(), {{"step_init", format_double(cfg.step)},
                                 {"rel_tol", format_double(cfg.rel_tol)},
                                 {"abs_tol", format_double(cfg.abs_tol)},
                                 {"event_tol", format_double(cfg.event_tol)},
                                 {"fold_tol", format_double(cfg.fold_tol)}});
      } else {
        double s_step = sim_step->count() ? step : 1e-4;
        meta.insert(meta.end(), {{"sigmoid", json_quote(sigmoid_name)},
                                 {"eps", format_double(eps)},
                                 {"step", format_double(s_step)},
                                 {"stride", std::to_string(stride)}});
        if (engine == "smooth") {
          traj = smooth_simulate(src.system, src.x0, src.t0, t1, sg, s_step, stride);
        } else {
          meta.insert(meta.end(),
                      {{"kappa", format_double(kappa)}, {"seed", std::to_string(seed)}});
          NoiseConfig nc{kappa, static_cast<std::uint64_t>(seed), s_step};
          traj = stochastic_simulate(src.system, src.x0, src.t0, t1, sg, nc, stride);
        }
      }

      if (format == "json") {
        detail::with_output(out_path, out,
                            [&](std::ostream& os) { write_run_json(os, traj, meta); });
      } else {
        detail::with_output(out_path, out,
                            [&](std::ostream& os) { write_trajectory_csv(os, traj); });
        detail::with_output(events_sibling_path(out_path), out,
                            [&](std::ostream& os) { write_events_csv(os, traj); });
      }
      return 0;
    }

    if (ana->parsed()) {
      std::vector<double> x = ana_x->count() ? x_point : src.probe_x;
      if (x.size() != static_cast<std::size_t>(n))
        throw detail::UsageError("--x must list " + std::to_string(n) + " components");
      double t = ana_t->count() ? t_point : src.probe_t;

      double scale = layer_scale(src.system, x, t);
      double fm = src.system.normal_component({x, t, -1.0});
      double fp = src.system.normal_component({x, t, 1.0});
      auto roots = find_sliding_roots(src.system, x, t);
      auto fil = filippov_root(src.system, x, t);

      std::string js = "{\n  \"point\": [";
      for (std::size_t i = 0; i < x.size(); ++i)
        js += (i ? ", " : "") + format_double(x[i]);
      js += "],\n  \"t\": " + format_double(t);
      js += ",\n  \"h\": " + format_double(src.system.surface_value(x));
      js += ",\n  \"scale\": " + format_double(scale);
      js += ",\n  \"normal_minus\": " + format_double(fm);
      js += ",\n  \"normal_plus\": " + format_double(fp);
      js += ",\n  \"roots\": [";
      for (std::size_t i = 0; i < roots.size(); ++i)
        js += (i ? ", " : "") + detail::root_json(roots[i]);
      js += "],\n  \"filippov_root\": " + (fil ? detail::root_json(*fil) : "null");
      for (int side : {-1, 1}) {
        double f_entry = side < 0 ? fm : fp;
        js += ",\n  \"arrival_from_";
        js += side < 0 ? "minus" : "plus";
        js += "\": ";
        bool arrives = f_entry * side < 0.0 && std::abs(f_entry) > 1e-11 * scale;
        js += arrives ? detail::decision_json(decide_passage(src.system, x, t, side))
                      : "null";
      }
      js += "\n}\n";
      detail::with_output(out_path, out, [&](std::ostream& os) { os << js; });
      return 0;
    }

    if (swp->parsed()) {
      if (kappas.empty() == steps.empty())
        throw detail::UsageError("give exactly one of --kappas or --steps (non-empty)");
      Sigmoid sg{*sigmoid_kind_from_name(sigmoid_name), eps, 1.0};

      if (!kappas.empty()) {
        double horizon = swp_tend->count() ? t_end : 1.0;
        double substep = swp_step->count() ? step : 1e-4;
        auto curve = washout_curve(src.system, src.x0, sg, kappas, static_cast<int>(runs),
                                   horizon, substep, static_cast<std::uint64_t>(seed));
        err << "washout reference scale r(eps) = " << format_double(washout_reference_scale(eps))
            << '\n';
        detail::with_output(out_path, out, [&](std::ostream& os) {
          os << "kappa,stick_fraction\n";
          for (const WashoutPoint& p : curve)
            os << format_double(p.kappa) << ',' << format_double(p.stick_fraction) << '\n';
        });
        return 0;
      }

      double t1 = swp_tend->count() ? t_end : src.t1;
      if (!(t1 > src.t0)) throw detail::UsageError("t-end must exceed the start time");
      std::vector<double> order = steps;
      std::sort(order.begin(), order.end(), std::greater<>());  // coarse to fine
      std::vector<Trajectory> trajs;
      for (double s : order) {
        if (!(s > 0.0)) throw detail::UsageError("steps must be positive");
        trajs.push_back(smooth_simulate(src.system, src.x0, src.t0, t1, sg, s, stride));
      }
      detail::with_output(out_path, out, [&](std::ostream& os) {
        os << "step,transit,t_entry,delta_t,lambda\n";
        for (std::size_t si = 0; si < order.size(); ++si) {
          const Trajectory& tr = trajs[si];
          int transit = -1;
          for (std::size_t i = 0; i < tr.size();) {
            if (tr.mode(i) != Mode::InLayerTransit) {
              ++i;
              continue;
            }
            ++transit;
            double entry = tr.t(i);
            for (; i < tr.size() && tr.mode(i) == Mode::InLayerTransit; ++i)
              os << format_double(order[si]) << ',' << transit << ','
                 << format_double(entry) << ',' << format_double(tr.t(i) - entry) << ','
                 << format_double(tr.lam(i)) << '\n';
          }
        }
      });
      // Where consecutive refinements separate: first time the interpolated
      // states differ by more than 0.1 in any component.
      std::vector<double> xa, xb;
      for (std::size_t si = 0; si + 1 < trajs.size(); ++si) {
        double t_div = std::nan("");
        for (int k = 0; k <= 2000; ++k) {
          double t = src.t0 + (t1 - src.t0) * k / 2000.0;
          detail::interp_state(trajs[si], t, xa);
          detail::interp_state(trajs[si + 1], t, xb);
          double d = 0.0;
          for (std::size_t i = 0; i < xa.size(); ++i)
            d = std::max(d, std::abs(xa[i] - xb[i]));
          if (d > 0.1) {
            t_div = t;
            break;
          }
        }
        err << "divergence(step " << format_double(order[si]) << " vs "
            << format_double(order[si + 1]) << "): ";
        if (std::isnan(t_div))
          err << "none within horizon\n";
        else
          err << "t = " << format_double(t_div) << '\n';
      }
      return 0;
    }

    if (dec->parsed()) {
      SplitForm split = src.system.is_split()
                            ? std::get<SplitForm>(src.system.form)
                            : hidyn::decompose(std::get<CombinedForm>(src.system.form).f);
      ParsedConfig pc;
      pc.system = SwitchedSystem::split(n, src.system.h, std::move(split.fplus),
                                        std::move(split.fminus), std::move(split.g));
      pc.x0 = src.x0;
      pc.t0 = src.t0;
      pc.t1 = src.t1;
      detail::with_output(out_path, out,
                          [&](std::ostream& os) { os << serialize_config(pc); });
    }
    return 0;
  } catch (const detail::UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const EvalError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const hidyn::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace hidyn::cli
