// prft: counting statistics of classical driving fields coupled to a small
// quantum system. Data out is CSV with '#' headers; see README for the
// subcommands.

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "prft/counting.hpp"
#include "prft/decoherence.hpp"
#include "prft/io.hpp"
#include "prft/jaynescummings.hpp"
#include "prft/oracle.hpp"
#include "prft/statistics.hpp"

namespace fs = std::filesystem;
using namespace prft;

namespace {

struct Options {
  std::string preset;
  std::string config;
  std::string out;
  int grid = 4096;
  double fd_step = 0.0;  // 0: preset default
  std::string sigma2 = "";
  double tmax = 0.0;  // 0: preset default
  int tpoints = 0;
  int threads = 1;
  std::string variants = "prft,pfo,aprft";
  std::string times = "";
};

struct Run {
  DrivenSystem system;
  GaussianPhotonState photons;
  Vector matter;
  std::string label;
  double tmax;
  int tpoints;
  double fd_step;
  std::vector<double> sigma2_sweep;
};

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

Run make_run(const Options& opt) {
  if (!opt.preset.empty() && !opt.config.empty())
    throw SpecError("give either --preset or --config, not both");
  if (!opt.config.empty()) {
    SystemFile sf = parse_system_file(opt.config);
    Vector matter;
    if (sf.matter_state) {
      matter = *sf.matter_state;
    } else {
      // default to the lowest Floquet state at the mean phases
      Vector seed = Vector::Zero(sf.system.dim());
      seed[0] = 1.0;
      FloquetDecomposition dec =
          floquet_decompose(sf.system, sf.photons.mean_phases(), seed);
      matter = dec.modes.front().col(0);
    }
    Run run{sf.system,
            sf.photons,
            matter,
            fs::path(opt.config).stem().string(),
            opt.tmax > 0 ? opt.tmax : 100.0,
            opt.tpoints > 0 ? opt.tpoints : 51,
            opt.fd_step > 0 ? opt.fd_step : 1e-3,
            {1e2, 1e3, 1e4}};
    if (!opt.sigma2.empty()) run.sigma2_sweep = parse_list(opt.sigma2);
    return run;
  }
  const std::string name = opt.preset.empty() ? "fig2" : opt.preset;
  FigurePreset p = figure_preset(name);
  Run run{p.system,
          p.photons,
          p.matter_states.front().second,
          name,
          opt.tmax > 0 ? opt.tmax : p.t_max,
          opt.tpoints > 0 ? opt.tpoints : p.t_points,
          opt.fd_step > 0 ? opt.fd_step : p.fd_step,
          p.sigma2_sweep};
  if (!opt.sigma2.empty()) run.sigma2_sweep = parse_list(opt.sigma2);
  return run;
}

fs::path output_dir(const Options& opt) {
  std::string dir = opt.out;
  if (dir.empty()) {
    if (const char* env = std::getenv("PRFT_OUT")) dir = env;
  }
  if (dir.empty()) dir = ".";
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

std::string hash_of(const Options& opt, const std::string& command) {
  std::ostringstream os;
  os << command << "|preset=" << opt.preset << "|config=" << opt.config
     << "|grid=" << opt.grid << "|fd=" << opt.fd_step
     << "|sigma2=" << opt.sigma2 << "|tmax=" << opt.tmax
     << "|tpoints=" << opt.tpoints << "|variants=" << opt.variants
     << "|times=" << opt.times;
  return config_hash(os.str());
}

RealVector linspace(double a, double b, int n) {
  RealVector g(n);
  for (int i = 0; i < n; ++i) g[i] = a + (b - a) * i / (n - 1);
  return g;
}

RealVector logspace(double a, double b, int n) {
  RealVector g(n);
  for (int i = 0; i < n; ++i)
    g[i] = a * std::pow(b / a, double(i) / (n - 1));
  return g;
}

GaussianPhotonState with_sigma2(const GaussianPhotonState& base,
                                double sigma2) {
  const int nm = base.n_modes();
  RealMatrix sigma = std::sqrt(sigma2) * RealMatrix::Identity(nm, nm);
  return GaussianPhotonState(base.mean_photons(), sigma, base.mean_phases());
}

FloquetDecomposition decompose_with_gradients(const Run& run) {
  FloquetDecomposition dec = floquet_decompose(
      run.system, run.photons.mean_phases(), run.matter);
  dec.gradients =
      quasienergy_gradient(run.system, run.photons.mean_phases(), dec);
  return dec;
}

struct Timer {
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  std::string seconds() const {
    const double s = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start)
                         .count();
    return format_number(s);
  }
};

void manifest(const Options& opt, const fs::path& dir,
              const std::string& command, const Timer& timer,
              std::map<std::string, std::string> extra = {}) {
  std::map<std::string, std::string> m = {
      {"tool", "prft 1.0"},
      {"command", command},
      {"config_hash", hash_of(opt, command)},
      {"preset", opt.preset},
      {"config_file", opt.config},
      {"grid", std::to_string(opt.grid)},
      {"fd_step", format_number(opt.fd_step)},
      {"sigma2", opt.sigma2},
      {"tmax", format_number(opt.tmax)},
      {"tpoints", std::to_string(opt.tpoints)},
      {"integrator_tolerance", "1e-10"},
      {"quadrature_tolerance", "1e-8"},
      {"wall_seconds", timer.seconds()},
  };
  for (auto& [k, v] : extra) m[k] = v;
  write_manifest(dir / "manifest.json", m);
}

// ---- command implementations ----

void write_marginals(CsvWriter& csv, const PhotonDistribution& dist,
                     double t, const std::string& variant) {
  for (long i = 0; i < dist.size(); ++i) {
    if (dist.p[i] < 1e-14) continue;
    csv.row({format_number(t), std::to_string(dist.lo[0] + (int)i),
             format_number(dist.p[i]), variant});
  }
}

int cmd_figure(const Options& opt, const std::string& name) {
  Timer timer;
  Options o = opt;
  o.preset = name;
  Run run = make_run(o);
  const fs::path dir = output_dir(o);
  const std::string hash = hash_of(o, "figure " + name);
  FloquetDecomposition dec = decompose_with_gradients(run);
  PropagatorCache cache(run.system);
  const int nm = run.system.n_modes();

  if (name == "fig2") {
    const double sigma1 = run.photons.sigma()(0, 0);
    // (b) marginal distributions at t = 0, sigma, 2 sigma
    {
      CsvWriter csv(dir / "fig2b_distribution.csv",
                    {"t", "n", "p", "variant"}, hash);
      for (double t : {0.0, sigma1, 2.0 * sigma1}) {
        GaussianMgfEvaluator exact(run.system, run.photons, run.matter, t);
        auto exact_fn = [&](const RealVector& chi) {
          return exact.total(chi);
        };
        auto prft_fn = [&](const RealVector& chi) {
          return mgf_prft(run.system, run.photons.mean_phases(), run.matter,
                          chi, t, &cache) *
                 mgf_initial(run.photons, chi);
        };
        const double drift =
            t * dec.gradients.col(0).cwiseAbs().maxCoeff();
        const double k2 = sigma1 * sigma1 + drift * drift;
        write_marginals(csv,
                        distribution_fft(exact_fn, 0, nm, t, drift, k2,
                                         FftOptions{o.grid, 1e-9, 6}),
                        t, "exact");
        write_marginals(csv,
                        distribution_fft(prft_fn, 0, nm, t, drift, k2,
                                         FftOptions{o.grid, 1e-9, 6}),
                        t, "prft");
      }
    }
    // (c) matter decoherence
    {
      CsvWriter csv(dir / "fig2c_sigma_y.csv",
                    {"t", "sigma_y", "coherence"}, hash);
      const RealVector ts = linspace(0.0, run.tmax, run.tpoints);
      for (Eigen::Index i = 0; i < ts.size(); ++i) {
        const RealMatrix c =
            coherence_matrix_gaussian(dec, run.photons, ts[i]);
        const Matrix rho = reduced_density_semiclassical(dec, c, ts[i]);
        csv.row({ts[i], observable_expectation(rho, pauli_y()), c(0, 1)});
      }
    }
    // (d) cumulants, exact vs prft
    {
      CsvWriter csv(dir / "fig2d_cumulants.csv",
                    {"t", "order", "value", "variant"}, hash);
      const RealVector ts = logspace(2.0, run.tmax, 25);
      const MgfFamily prft_fam = [&](double t) -> MgfFunction {
        return [&, t](const RealVector& chi) {
          return mgf_prft(run.system, run.photons.mean_phases(), run.matter,
                          chi, t, &cache);
        };
      };
      const MgfFamily exact_fam = [&](double t) -> MgfFunction {
        auto eval = std::make_shared<GaussianMgfEvaluator>(
            run.system, run.photons, run.matter, t);
        return [eval](const RealVector& chi) {
          return eval->dynamical(chi);
        };
      };
      CumulantSeries prft = cumulant_series(prft_fam, 0, nm, 4, run.fd_step,
                                            ts, MgfVariant::Prft);
      CumulantSeries exact = cumulant_series(exact_fam, 0, nm, 4,
                                             run.fd_step, ts,
                                             MgfVariant::Exact);
      for (Eigen::Index i = 0; i < ts.size(); ++i)
        for (int l = 1; l <= 4; ++l) {
          csv.row({format_number(ts[i]), std::to_string(l),
                   format_number(prft.values(i, l - 1)), "prft"});
          csv.row({format_number(ts[i]), std::to_string(l),
                   format_number(exact.values(i, l - 1)), "exact"});
        }
    }
    // (e) error vs sigma^2 at t = tmax
    {
      CsvWriter csv(dir / "fig2e_error.csv",
                    {"sigma2", "order", "delta_kappa"}, hash);
      const double t = run.tmax;
      const MgfFunction prft_fn = [&](const RealVector& chi) {
        return mgf_prft(run.system, run.photons.mean_phases(), run.matter,
                        chi, t, &cache);
      };
      const RealVector kp = cumulants_at(prft_fn, 0, nm, 4, run.fd_step);
      for (double s2 : run.sigma2_sweep) {
        GaussianPhotonState photons = with_sigma2(run.photons, s2);
        GaussianMgfEvaluator exact(run.system, photons, run.matter, t);
        const MgfFunction exact_fn = [&](const RealVector& chi) {
          return exact.dynamical(chi);
        };
        const RealVector ke = cumulants_at(exact_fn, 0, nm, 4, run.fd_step);
        for (int l = 1; l <= 4; ++l)
          csv.row({format_number(s2), std::to_string(l),
                   format_number(std::abs(ke[l - 1] - kp[l - 1]))});
      }
    }
    manifest(o, dir, "figure fig2", timer);
    return 0;
  }

  if (name == "fig3") {
    ErrorScalingReport report = error_scaling_fit(
        run.system, run.photons.mean_phases(), run.matter, run.sigma2_sweep,
        logspace(2.0, run.tmax, 13), 4, run.fd_step);
    CsvWriter cum(dir / "fig3a_cumulants.csv",
                  {"t", "order", "value", "sigma2", "variant"}, hash);
    CsvWriter err(dir / "fig3b_error.csv",
                  {"t", "order", "sigma2", "delta_kappa"}, hash);
    for (const auto& ord : report.orders)
      for (int s = 0; s < ord.sigma2.size(); ++s)
        for (Eigen::Index i = 0; i < report.times.size(); ++i)
          err.row({format_number(report.times[i]),
                   std::to_string(ord.order), format_number(ord.sigma2[s]),
                   format_number(ord.error(s, i))});
    for (Eigen::Index i = 0; i < report.times.size(); ++i)
      for (int l = 1; l <= 4; ++l) {
        cum.row({format_number(report.times[i]), std::to_string(l),
                 format_number(report.prft.values(i, l - 1)),
                 format_number(0.0), "prft"});
        for (std::size_t s = 0; s < report.exact.size(); ++s)
          cum.row({format_number(report.times[i]), std::to_string(l),
                   format_number(report.exact[s].values(i, l - 1)),
                   format_number(run.sigma2_sweep[s]), "exact"});
      }
    CsvWriter fits(dir / "fig3_fits.csv",
                   {"order", "sigma2", "t_exponent", "sigma_exponent"},
                   hash);
    for (const auto& ord : report.orders)
      for (int s = 0; s < ord.sigma2.size(); ++s)
        fits.row({std::to_string(ord.order), format_number(ord.sigma2[s]),
                  format_number(ord.time_exponent[s]),
                  format_number(ord.sigma_exponent)});
    manifest(o, dir, "figure fig3", timer);
    return 0;
  }

  if (name == "fig4") {
    FigurePreset preset = figure_preset("fig4");
    CsvWriter dist(dir / "fig4a_distribution.csv",
                   {"state", "t", "n", "p"}, hash);
    CsvWriter sy(dir / "fig4b_sigma_y.csv", {"state", "t", "sigma_y"}, hash);
    CsvWriter cum(dir / "fig4c_cumulants.csv",
                  {"state", "variant", "t", "order", "value"}, hash);
    const RealVector ts = linspace(0.0, run.tmax, run.tpoints);
    for (const auto& [label, state] : preset.matter_states) {
      FloquetDecomposition d =
          floquet_decompose(run.system, run.photons.mean_phases(), state);
      d.gradients =
          quasienergy_gradient(run.system, run.photons.mean_phases(), d);
      // (a) total PRFT marginal at t = 2 sigma
      const double sigma1 = run.photons.sigma()(0, 0);
      const double t_snap = 2.0 * sigma1;
      auto prft_total = [&](const RealVector& chi) {
        return mgf_prft(run.system, run.photons.mean_phases(), state, chi,
                        t_snap, &cache) *
               mgf_initial(run.photons, chi);
      };
      const double driftmax =
          t_snap * d.gradients.col(0).cwiseAbs().maxCoeff();
      PhotonDistribution pd = distribution_fft(
          prft_total, 0, nm, t_snap, driftmax,
          run.photons.sigma_sq()(0, 0) + driftmax * driftmax,
          FftOptions{o.grid, 1e-9, 6});
      for (long i = 0; i < pd.size(); ++i)
        if (pd.p[i] > 1e-14)
          dist.row({label, format_number(t_snap),
                    std::to_string(pd.lo[0] + (int)i),
                    format_number(pd.p[i])});
      // (b) decoherence
      for (Eigen::Index i = 0; i < ts.size(); ++i) {
        const RealMatrix c = coherence_matrix_gaussian(d, run.photons, ts[i]);
        const Matrix rho = reduced_density_semiclassical(d, c, ts[i]);
        sy.row({label, format_number(ts[i]),
                format_number(observable_expectation(rho, pauli_y()))});
      }
      // (c) three MGF variants
      const RealVector tcum = logspace(2.0, run.tmax, 17);
      const MgfFamily prft_fam = [&](double t) -> MgfFunction {
        return [&, t](const RealVector& chi) {
          return mgf_prft(run.system, run.photons.mean_phases(), state, chi,
                          t, &cache);
        };
      };
      const MgfFamily pfo_fam = [&](double t) -> MgfFunction {
        auto eval = std::make_shared<PfoEvaluator>(
            run.system, run.photons.mean_phases(), state, t);
        return [eval](const RealVector& chi) { return (*eval)(chi); };
      };
      const MgfFamily aprft_fam = [&](double t) -> MgfFunction {
        return [&, t](const RealVector& chi) {
          return mgf_aprft(run.system, run.photons.mean_phases(), state, chi,
                           t, &cache);
        };
      };
      const std::vector<std::pair<std::string, MgfFamily>> fams = {
          {"prft", prft_fam}, {"pfo", pfo_fam}, {"aprft", aprft_fam}};
      for (const auto& [vname, fam] : fams) {
        CumulantSeries s = cumulant_series(fam, 0, nm, 4, run.fd_step, tcum,
                                           MgfVariant::Prft);
        for (Eigen::Index i = 0; i < tcum.size(); ++i)
          for (int l = 1; l <= 4; ++l)
            cum.row({label, vname, format_number(tcum[i]),
                     std::to_string(l), format_number(s.values(i, l - 1))});
      }
    }
    manifest(o, dir, "figure fig4", timer);
    return 0;
  }
  throw SpecError("figure: unknown name " + name);
}

int cmd_cumulants(const Options& opt) {
  Timer timer;
  Run run = make_run(opt);
  const fs::path dir = output_dir(opt);
  const std::string hash = hash_of(opt, "cumulants");
  ErrorScalingReport report = error_scaling_fit(
      run.system, run.photons.mean_phases(), run.matter, run.sigma2_sweep,
      logspace(std::max(2.0, run.tmax / 100.0), run.tmax, run.tpoints > 4
                   ? std::min(run.tpoints, 25)
                   : 13),
      4, run.fd_step);
  CsvWriter cum(dir / "cumulants.csv",
                {"t", "order", "sigma2", "kappa_exact", "kappa_prft",
                 "delta"},
                hash);
  for (std::size_t s = 0; s < run.sigma2_sweep.size(); ++s)
    for (Eigen::Index i = 0; i < report.times.size(); ++i)
      for (const auto& ord : report.orders)
        cum.row({format_number(report.times[i]), std::to_string(ord.order),
                 format_number(run.sigma2_sweep[s]),
                 format_number(report.exact[s].values(i, ord.order - 1)),
                 format_number(report.prft.values(i, ord.order - 1)),
                 format_number(ord.error(s, i))});
  CsvWriter fits(dir / "scaling_report.csv",
                 {"order", "sigma2", "t_exponent", "sigma_exponent",
                  "f_coefficient", "conclusive"},
                 hash);
  for (const auto& ord : report.orders)
    for (int s = 0; s < ord.sigma2.size(); ++s)
      fits.row({std::to_string(ord.order), format_number(ord.sigma2[s]),
                format_number(ord.time_exponent[s]),
                format_number(ord.sigma_exponent),
                format_number(ord.f_coefficient),
                ord.conclusive ? "1" : "0"});
  manifest(opt, dir, "cumulants", timer);
  return 0;
}

int cmd_distribution(const Options& opt) {
  Timer timer;
  Run run = make_run(opt);
  const fs::path dir = output_dir(opt);
  const std::string hash = hash_of(opt, "distribution");
  FloquetDecomposition dec = decompose_with_gradients(run);
  PropagatorCache cache(run.system);
  const int nm = run.system.n_modes();
  std::vector<double> times = parse_list(opt.times);
  if (times.empty()) times = {0.0, 0.5 * run.tmax, run.tmax};
  CsvWriter csv(dir / "distribution.csv", {"t", "n", "p", "variant"}, hash);
  for (double t : times) {
    const double drift = t * dec.gradients.col(0).cwiseAbs().maxCoeff();
    const double k2 = run.photons.sigma_sq()(0, 0) + drift * drift;
    for (const std::string& v : {"prft", "semiclassical", "exact"}) {
      MgfFunction fn;
      std::shared_ptr<GaussianMgfEvaluator> exact;
      if (v == "prft")
        fn = [&](const RealVector& chi) {
          return mgf_prft(run.system, run.photons.mean_phases(), run.matter,
                          chi, t, &cache) *
                 mgf_initial(run.photons, chi);
        };
      else if (v == "semiclassical")
        fn = [&](const RealVector& chi) {
          return mgf_semiclassical_floquet(dec, chi, t) *
                 mgf_initial(run.photons, chi);
        };
      else {
        exact = std::make_shared<GaussianMgfEvaluator>(
            run.system, run.photons, run.matter, t);
        fn = [exact](const RealVector& chi) { return exact->total(chi); };
      }
      write_marginals(csv,
                      distribution_fft(fn, 0, nm, t, drift, k2,
                                       FftOptions{opt.grid, 1e-9, 6}),
                      t, v);
    }
  }
  // coarse MGF table alongside the distributions
  {
    std::vector<int> sizes(nm, 16);
    CountingGrid grid(sizes);
    RealVector tv = Eigen::Map<const RealVector>(times.data(),
                                                 times.size());
    MgfTable table = tabulate_mgf(
        MgfVariant::Total,
        [&](const RealVector& chi, double t) {
          return mgf_prft(run.system, run.photons.mean_phases(), run.matter,
                          chi, t, &cache) *
                 mgf_initial(run.photons, chi);
        },
        grid, tv);
    write_mgf_table(dir / "mgf_table.csv", table, hash);
  }
  manifest(opt, dir, "distribution", timer);
  return 0;
}

int cmd_decoherence(const Options& opt) {
  Timer timer;
  Run run = make_run(opt);
  const fs::path dir = output_dir(opt);
  const std::string hash = hash_of(opt, "decoherence");
  FloquetDecomposition dec = decompose_with_gradients(run);
  const RealVector ts = linspace(0.0, run.tmax, run.tpoints);
  CsvWriter csv(dir / "sigma_y.csv",
                {"t", "sigma_y", "coherence_12", "envelope_model"}, hash);
  const int nm = run.system.n_modes();
  for (Eigen::Index i = 0; i < ts.size(); ++i) {
    const RealMatrix c = coherence_matrix_gaussian(dec, run.photons, ts[i]);
    const Matrix rho = reduced_density_semiclassical(dec, c, ts[i]);
    double model = 1.0;
    for (int k = 0; k < nm; ++k) {
      const double dn = ts[i] * (dec.gradients(0, k) - dec.gradients(1, k));
      model *= std::exp(-dn * dn / (8.0 * run.photons.sigma_sq()(k, k)));
    }
    csv.row({ts[i], observable_expectation(rho, pauli_y()), c(0, 1), model});
  }
  // Kraus channel at a representative time on a window sized to the drift
  const double t = std::min(run.tmax, 5.0 * run.photons.sigma()(0, 0));
  const double drift = t * dec.gradients.cwiseAbs().maxCoeff();
  const int w = static_cast<int>(
      std::ceil(8.0 * run.photons.sigma()(0, 0) + drift + 2.0));
  std::vector<int> lo(nm, -w), extent(nm, 2 * w + 1);
  KrausSet kraus =
      kraus_operators(run.system, run.photons, t, lo, extent);
  manifest(opt, dir, "decoherence", timer,
           {{"kraus_time", format_number(t)},
            {"kraus_completeness_defect",
             format_number(kraus.completeness_defect())}});
  return 0;
}

int cmd_compare(const Options& opt) {
  Timer timer;
  Run run = make_run(opt);
  if (!opt.preset.empty() || opt.config.empty()) {
    // higher cumulants separate the variants only for superposition states
    FigurePreset p = figure_preset(opt.preset.empty() ? "fig4" : opt.preset);
    for (const auto& [label, state] : p.matter_states)
      if (label == "superposition") run.matter = state;
  }
  const fs::path dir = output_dir(opt);
  const std::string hash = hash_of(opt, "compare-variants");
  std::stringstream ss(opt.variants);
  std::vector<std::string> variants;
  std::string item;
  while (std::getline(ss, item, ',')) variants.push_back(item);
  if (variants.size() < 2)
    throw SpecError("compare-variants: need at least two variants");
  PropagatorCache cache(run.system);
  const int nm = run.system.n_modes();
  const RealVector ts = logspace(2.0, run.tmax, run.tpoints > 4
                                     ? std::min(run.tpoints, 33)
                                     : 17);
  std::map<std::string, CumulantSeries> series;
  for (const auto& v : variants) {
    MgfFamily fam;
    if (v == "prft")
      fam = [&](double t) -> MgfFunction {
        return [&, t](const RealVector& chi) {
          return mgf_prft(run.system, run.photons.mean_phases(), run.matter,
                          chi, t, &cache);
        };
      };
    else if (v == "pfo")
      fam = [&](double t) -> MgfFunction {
        auto eval = std::make_shared<PfoEvaluator>(
            run.system, run.photons.mean_phases(), run.matter, t);
        return [eval](const RealVector& chi) { return (*eval)(chi); };
      };
    else if (v == "aprft")
      fam = [&](double t) -> MgfFunction {
        return [&, t](const RealVector& chi) {
          return mgf_aprft(run.system, run.photons.mean_phases(), run.matter,
                           chi, t, &cache);
        };
      };
    else
      throw SpecError("compare-variants: unknown variant " + v);
    series[v] = cumulant_series(fam, 0, nm, 4, run.fd_step, ts,
                                MgfVariant::Prft);
  }
  CsvWriter csv(dir / "compare_cumulants.csv",
                {"t", "order", "variant", "value"}, hash);
  for (Eigen::Index i = 0; i < ts.size(); ++i)
    for (int l = 1; l <= 4; ++l)
      for (const auto& v : variants)
        csv.row({format_number(ts[i]), std::to_string(l), v,
                 format_number(series[v].values(i, l - 1))});
  // leading-coefficient fits over the last decade
  std::vector<Eigen::Index> win;
  for (Eigen::Index i = 0; i < ts.size(); ++i)
    if (ts[i] >= 0.5 * ts[ts.size() - 1]) win.push_back(i);
  CsvWriter fits(dir / "compare_fits.csv",
                 {"order", "variant", "leading_coefficient",
                  "max_diff_vs_prft"},
                 hash);
  for (int l = 1; l <= 4; ++l) {
    std::map<std::string, double> lead;
    for (const auto& v : variants) {
      RealVector tw(win.size()), kw(win.size());
      for (std::size_t i = 0; i < win.size(); ++i) {
        tw[i] = ts[win[i]];
        kw[i] = series[v].values(win[i], l - 1);
      }
      const RealVector coeffs = fit_time_polynomial(tw, kw, l, 1);
      lead[v] = coeffs[coeffs.size() - 1];
    }
    for (const auto& v : variants) {
      double maxdiff = 0.0;
      if (series.count("prft"))
        for (Eigen::Index i = 0; i < ts.size(); ++i)
          maxdiff = std::max(maxdiff,
                             std::abs(series[v].values(i, l - 1) -
                                      series["prft"].values(i, l - 1)));
      fits.row({std::to_string(l), v, format_number(lead[v]),
                format_number(maxdiff)});
    }
  }
  manifest(opt, dir, "compare-variants", timer);
  return 0;
}

int cmd_validate(const Options& opt) {
  Timer timer;
  Run run = make_run(opt);
  // property checks are scale-free; a sigma^2 = 1e2 copy keeps the Kraus
  // window small
  const int nm0 = run.photons.n_modes();
  run.photons = GaussianPhotonState(run.photons.mean_photons(),
                                    10.0 * RealMatrix::Identity(nm0, nm0),
                                    run.photons.mean_phases());
  run.tmax = std::min(run.tmax, 50.0);
  const fs::path dir = output_dir(opt);
  FloquetDecomposition dec = decompose_with_gradients(run);
  PropagatorCache cache(run.system);
  const int nm = run.system.n_modes();
  int failures = 0;
  auto check = [&](const std::string& name, bool ok) {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << "\n";
    if (!ok) ++failures;
  };

  const double t = std::min(run.tmax, 50.0);
  RealVector chi0 = RealVector::Zero(nm);
  check("M(0) = 1 (prft)",
        std::abs(mgf_prft(run.system, run.photons.mean_phases(), run.matter,
                          chi0, t, &cache) -
                 1.0) < 1e-10);
  check("M(0) = 1 (exact)",
        std::abs(mgf_exact_gaussian(run.system, run.photons, run.matter,
                                    chi0, t) -
                 1.0) < 1e-10);
  Propagator prop = evolve(run.system, run.photons.mean_phases(),
                           linspace(0.0, run.system.period(), 65));
  check("unitarity defect <= 1e-9", prop.max_unitarity_defect() <= 1e-9);
  auto prft_total = [&](const RealVector& chi) {
    return mgf_prft(run.system, run.photons.mean_phases(), run.matter, chi,
                    t, &cache) *
           mgf_initial(run.photons, chi);
  };
  const double drift = t * dec.gradients.col(0).cwiseAbs().maxCoeff();
  PhotonDistribution pd = distribution_fft(
      prft_total, 0, nm, t, drift,
      run.photons.sigma_sq()(0, 0) + drift * drift,
      FftOptions{opt.grid, 1e-9, 6});
  check("sum p = 1", pd.normalization_defect < 1e-9);
  check("p >= -1e-9 (FFT negativity gate)", pd.p.minCoeff() >= 0.0);
  const double sigma0 = run.photons.sigma()(0, 0);
  const int w = static_cast<int>(std::ceil(8.0 * sigma0 + drift + 2.0));
  KrausSet kraus = kraus_operators(run.system, run.photons, t,
                                   std::vector<int>(nm, -w),
                                   std::vector<int>(nm, 2 * w + 1));
  check("Kraus completeness <= 1e-8", kraus.completeness_defect() <= 1e-8);
  const RealMatrix c = coherence_matrix_gaussian(dec, run.photons, t);
  bool cdiag = true, cbound = true;
  for (int a = 0; a < c.rows(); ++a) {
    if (c(a, a) != 1.0) cdiag = false;
    for (int b = 0; b < c.cols(); ++b)
      if (c(a, b) > 1.0 + 1e-12) cbound = false;
  }
  check("C_mumu = 1 exactly", cdiag);
  check("C <= 1", cbound);
  const RealMatrix fd = quasienergy_gradient_fd(
      run.system, run.photons.mean_phases(), dec);
  const double rel =
      (dec.gradients - fd).cwiseAbs().maxCoeff() /
      std::max(1e-12, dec.gradients.cwiseAbs().maxCoeff());
  check("Hellmann-Feynman vs finite-difference gradients (1e-6 rel)",
        rel <= 1e-6);
  std::array<double, 4> kref = {0.3, 1.7, -0.4, 2.2};
  const auto roundtrip = cumulants_from_moments(moments_from_cumulants(kref));
  double rt = 0.0;
  for (int i = 0; i < 4; ++i) rt = std::max(rt, std::abs(roundtrip[i] -
                                                         kref[i]));
  check("cumulant-moment round trip <= 1e-12", rt <= 1e-12);
  manifest(opt, dir, "validate", timer,
           {{"failures", std::to_string(failures)}});
  return failures == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"prft: photon counting statistics of driven quantum systems"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  Options opt;
  app.add_option("--preset", opt.preset, "preset name (fig2, fig3, fig4)");
  app.add_option("--config", opt.config, "system file");
  app.add_option("--out", opt.out, "output directory (default $PRFT_OUT)");
  app.add_option("--grid", opt.grid, "counting grid size (power of two)");
  app.add_option("--fd-step", opt.fd_step, "finite-difference step");
  app.add_option("--sigma2", opt.sigma2, "comma list of variances");
  app.add_option("--tmax", opt.tmax, "time window");
  app.add_option("--tpoints", opt.tpoints, "time grid points");
  app.add_option("--threads", opt.threads, "worker threads");
  app.add_option("--variants", opt.variants, "comma list for compare");
  app.add_option("--times", opt.times, "comma list of snapshot times");

  std::string figure_name;
  CLI::App* figure = app.add_subcommand("figure", "reproduce a figure run");
  figure->add_option("name", figure_name, "fig2 | fig3 | fig4")->required();
  CLI::App* cumulants =
      app.add_subcommand("cumulants", "cumulant and error scan");
  CLI::App* distribution =
      app.add_subcommand("distribution", "photon-number distributions");
  CLI::App* decoherence =
      app.add_subcommand("decoherence", "reduced matter dynamics and Kraus");
  CLI::App* compare =
      app.add_subcommand("compare-variants", "PRFT vs PFO vs aPRFT");
  CLI::App* validate = app.add_subcommand("validate", "property suite");

  CLI11_PARSE(app, argc, argv);
  try {
    if (figure->parsed()) return cmd_figure(opt, figure_name);
    if (cumulants->parsed()) return cmd_cumulants(opt);
    if (distribution->parsed()) return cmd_distribution(opt);
    if (decoherence->parsed()) return cmd_decoherence(opt);
    if (compare->parsed()) return cmd_compare(opt);
    if (validate->parsed()) return cmd_validate(opt);
  } catch (const SpecError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
