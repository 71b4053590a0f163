// Command-line harness: train / predict / sweep / inspect-manifold / tune.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "mhr/mhr.hpp"

namespace fs = std::filesystem;

namespace {

struct LoadedData {
  mhr::MultiviewDataset train;   // unmasked ground truth
  mhr::MultiviewDataset test;    // held-out split (generator only; may be empty)
  mhr::Matrix latent;            // generator latent coords, empty for file data
  bool has_test = false;
};

LoadedData load_data(const mhr::RunConfig& cfg) {
  LoadedData out;
  if (!cfg.dataset_path.empty()) {
    out.train = mhr::load_dataset(cfg.dataset_path);
    return out;
  }
  if (cfg.generator.name.empty())
    throw mhr::Error("dataset", "config needs either a path or a generator");
  mhr::SyntheticData gen = mhr::make_synthetic(cfg.generator);
  out.train = std::move(gen.dataset);
  out.latent = std::move(gen.latent);
  mhr::SyntheticSpec test_spec = cfg.generator;
  test_spec.seed = cfg.generator.seed + 0x9e3779b9u;  // independent split
  if (cfg.test_n > 0) test_spec.n = cfg.test_n;
  out.test = mhr::make_synthetic(test_spec).dataset;
  out.has_test = true;
  return out;
}

void write_manifest(const fs::path& dir, const mhr::RunConfig& cfg,
                    const mhr::MultiviewDataset& masked, std::uint64_t model_hash) {
  std::ofstream mf(dir / "manifest.txt");
  mf << "dataset_fingerprint = " << masked.fingerprint() << "\n";
  mf << "model_fingerprint = " << model_hash << "\n";
  mf << "method = " << cfg.methods.front() << "\n";
  mf << "label_fraction = " << cfg.label_fraction << "\n";
  mf << "base_seed = " << cfg.base_seed << "\n";
  mf << "gamma_A = " << cfg.objective.gamma_A << "\n";
  mf << "gamma_I = " << cfg.objective.gamma_I << "\n";
  mf << "gamma_theta = " << cfg.objective.gamma_theta << "\n";
  mf << "gamma_beta = " << cfg.objective.gamma_beta << "\n";
}

std::uint64_t file_hash(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return mhr::fnv1a(bytes.data(), bytes.size());
}

int cmd_train(const std::string& config_path, const std::string& out_dir,
              std::int64_t seed_override, int workers) {
  mhr::RunConfig cfg = mhr::load_config(config_path);
  if (seed_override >= 0) cfg.base_seed = static_cast<std::uint64_t>(seed_override);
  LoadedData data = load_data(cfg);

  mhr::SweepConfig scfg = cfg.to_sweep_config();
  scfg.workers = workers;
  mhr::detail::SweepCache cache(data.train, scfg);

  const mhr::LabelMask mask = mhr::split_labels(data.train, cfg.label_fraction, cfg.base_seed);
  const mhr::MultiviewDataset masked = mhr::apply_mask(data.train, mask);
  const mhr::MethodTag tag = mhr::parse_method_tag(cfg.methods.front());
  const mhr::TrainedModel model = mhr::train_method(cache, tag, masked);

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  mhr::save_model((dir / "model.bin").string(), model);
  mhr::save_dataset(masked, (dir / "train_data").string());
  {
    std::ofstream tf(dir / "objective_trace.csv");
    tf << "step,objective\n";
    char buf[64];
    for (std::size_t i = 0; i < model.objective_trace.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, model.objective_trace[i]);
      tf << buf;
    }
  }
  write_manifest(dir, cfg, masked, file_hash(dir / "model.bin"));
  std::cout << "trained " << cfg.methods.front() << ": n=" << masked.n()
            << " l=" << masked.n_labeled() << " final objective "
            << model.objective_trace.back() << "\n";
  std::cout << "model written to " << (dir / "model.bin").string() << "\n";
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& data_path,
                const std::string& train_data_path, const std::string& out_csv) {
  const mhr::TrainedModel model = mhr::load_model(model_path);
  const std::string train_path = train_data_path.empty() ? data_path : train_data_path;
  const mhr::MultiviewDataset train = mhr::load_dataset(train_path);
  if (train.fingerprint() != model.data_fingerprint)
    throw mhr::Error("predict", "training-data fingerprint mismatch; model was fit on different data");
  const mhr::MultiviewDataset test =
      train_data_path.empty() ? train : mhr::load_dataset(data_path);
  if (test.n_views() != train.n_views())
    throw mhr::Error("predict", "view count mismatch between data and training data");
  for (mhr::Index v = 0; v < test.n_views(); ++v)
    if (test.views[static_cast<std::size_t>(v)].cols() !=
        train.views[static_cast<std::size_t>(v)].cols())
      throw mhr::Error("predict", "feature width mismatch in view '" +
                                      train.view_names[static_cast<std::size_t>(v)] + "'");

  const mhr::Vector scores = mhr::predict(model, test.views, train.views);
  std::ofstream f(out_csv);
  if (!f) throw mhr::Error("predict", "cannot write " + out_csv);
  f << "index,score,predicted\n";
  char buf[96];
  for (mhr::Index i = 0; i < scores.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%lld,%.17g,%d\n", static_cast<long long>(i), scores(i),
                  scores(i) >= 0 ? 1 : -1);
    f << buf;
  }
  std::cout << "wrote " << scores.size() << " scores to " << out_csv << "\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& fractions_arg, int repeats_arg,
              const std::string& out_dir, int workers) {
  mhr::RunConfig cfg = mhr::load_config(config_path);
  if (!fractions_arg.empty()) {
    cfg.fractions.clear();
    for (const auto& s : mhr::detail::split_list(fractions_arg))
      cfg.fractions.push_back(std::stod(s));
  }
  if (repeats_arg > 0) cfg.repeats = repeats_arg;
  LoadedData data = load_data(cfg);
  if (!data.has_test)
    throw mhr::Error("eval", "sweep needs a generator dataset (held-out test split)");

  mhr::SweepConfig scfg = cfg.to_sweep_config();
  scfg.workers = workers;
  const auto reports = mhr::run_sweep(data.train, data.test, scfg);

  fs::create_directories(out_dir);
  {
    std::ofstream f(fs::path(out_dir) / "reports.csv");
    f << mhr::reports_to_csv(reports);
  }
  std::cout << mhr::reports_summary(reports);
  std::cout << "reports written to " << (fs::path(out_dir) / "reports.csv").string() << "\n";
  return 0;
}

int cmd_inspect_manifold(const std::string& config_path, const std::string& out_csv) {
  mhr::RunConfig cfg = mhr::load_config(config_path);
  LoadedData data = load_data(cfg);
  const mhr::MultiviewDataset& ds = data.train;

  std::ostringstream os;
  os << "view,kind,m,min_eig,max_eig,const_energy,linear_energy\n";
  char buf[512];
  for (std::size_t v = 0; v < ds.views.size(); ++v) {
    const mhr::Matrix& x = cfg.standardize ? mhr::standardize(ds.views[v]) : ds.views[v];
    const mhr::Index k =
        cfg.knn_k > 0 ? cfg.knn_k : std::min<mhr::Index>(100, ds.n() - 1);
    const mhr::NeighborGraph g = mhr::knn(x, k);
    mhr::Index m = cfg.intrinsic_dim;
    if (m <= 0) m = mhr::estimate_intrinsic_dim(x, g, cfg.dim_threshold);

    const double bw = cfg.laplacian_bandwidth > 0 ? cfg.laplacian_bandwidth
                                                  : mhr::median_bandwidth(x);
    const mhr::ManifoldMatrix lap = mhr::laplacian(x, g, bw, ds.view_names[v]);
    const mhr::ManifoldMatrix hes = mhr::hessian_energy(x, g, m, ds.view_names[v]);

    const mhr::Vector ones = mhr::Vector::Ones(ds.n());
    mhr::Vector lin = mhr::Vector::Zero(ds.n());
    if (data.latent.size() > 0) lin = data.latent.col(0);

    for (const auto* mat : {&lap, &hes}) {
      const auto psd = mhr::check_psd(mat->matrix);
      std::snprintf(buf, sizeof buf, "%s,%s,%lld,%.6g,%.6g,%.6g,%.6g\n",
                    ds.view_names[v].c_str(), mhr::to_string(mat->kind).c_str(),
                    static_cast<long long>(mat->kind == mhr::ManifoldKind::hessian ? m : 0),
                    psd.min_eig, psd.max_eig, ones.dot(mat->matrix * ones),
                    lin.dot(mat->matrix * lin));
      os << buf;
    }
  }
  if (out_csv.empty()) {
    std::cout << os.str();
  } else {
    std::ofstream f(out_csv);
    f << os.str();
    std::cout << "diagnostics written to " << out_csv << "\n";
  }
  return 0;
}

int cmd_tune(const std::string& config_path, const std::string& grid_exp, const std::string& out_dir,
             int workers) {
  mhr::RunConfig cfg = mhr::load_config(config_path);
  int lo = -3, hi = 3;
  if (!grid_exp.empty()) {
    const auto dots = grid_exp.find("..");
    if (dots == std::string::npos)
      throw mhr::Error("config", "--grid-exp expects LO..HI, e.g. -10..10");
    lo = std::stoi(grid_exp.substr(0, dots));
    hi = std::stoi(grid_exp.substr(dots + 2));
  }
  LoadedData data = load_data(cfg);
  if (!data.has_test) throw mhr::Error("eval", "tune needs a generator dataset");

  // Tune at the smallest label fraction, reuse elsewhere.
  mhr::SweepConfig scfg = cfg.to_sweep_config();
  scfg.workers = workers;
  scfg.fractions = {cfg.label_fraction};
  scfg.repeats = std::min(cfg.repeats, 3);
  scfg.methods = {cfg.methods.front()};

  std::ostringstream os;
  os << "gamma_A,gamma_I,mean_AP\n";
  double best_ap = -1, best_ga = 0, best_gi = 0;
  char buf[128];
  for (int ea = lo; ea <= hi; ++ea) {
    for (int ei = lo; ei <= hi; ++ei) {
      scfg.objective.gamma_A = std::pow(10.0, ea);
      scfg.objective.gamma_I = std::pow(10.0, ei);
      const auto reports = mhr::run_sweep(data.train, data.test, scfg);
      std::vector<double> aps;
      for (const auto& r : reports) aps.push_back(r.ap);
      const double map = mhr::mean_ap(aps);
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.6f\n", scfg.objective.gamma_A,
                    scfg.objective.gamma_I, map);
      os << buf;
      if (map > best_ap) {
        best_ap = map;
        best_ga = scfg.objective.gamma_A;
        best_gi = scfg.objective.gamma_I;
      }
    }
  }
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream f(fs::path(out_dir) / "tune_grid.csv");
    f << os.str();
  }
  std::cout << os.str();
  std::cout << "best: gamma_A=" << best_ga << " gamma_I=" << best_gi << " mAP=" << best_ap << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multiview Hessian-regularized semi-supervised learning"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", model_path, data_path, train_data_path,
              out_csv, fractions_arg, grid_exp;
  std::int64_t seed = -1;
  int workers = 1, repeats = 0;

  auto* train = app.add_subcommand("train", "fit a model and write model/trace/manifest");
  train->add_option("--config", config_path)->required();
  train->add_option("--out", out_dir);
  train->add_option("--seed", seed);
  train->add_option("--workers", workers);

  auto* predict = app.add_subcommand("predict", "score a dataset with a trained model");
  predict->add_option("--model", model_path)->required();
  predict->add_option("--data", data_path)->required();
  predict->add_option("--train-data", train_data_path);
  predict->add_option("--out", out_csv)->required();

  auto* sweep = app.add_subcommand("sweep", "label-fraction sweep over method tags");
  sweep->add_option("--config", config_path)->required();
  sweep->add_option("--fractions", fractions_arg);
  sweep->add_option("--repeats", repeats);
  sweep->add_option("--out", out_dir);
  sweep->add_option("--workers", workers);

  auto* inspect = app.add_subcommand("inspect-manifold", "per-view regularizer diagnostics");
  inspect->add_option("--config", config_path)->required();
  inspect->add_option("--out", out_csv);

  auto* tune = app.add_subcommand("tune", "grid search gamma_A/gamma_I by validation mAP");
  tune->add_option("--config", config_path)->required();
  tune->add_option("--grid-exp", grid_exp);
  tune->add_option("--out", out_dir);
  tune->add_option("--workers", workers);

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_train(config_path, out_dir, seed, workers);
    if (predict->parsed()) return cmd_predict(model_path, data_path, train_data_path, out_csv);
    if (sweep->parsed()) return cmd_sweep(config_path, fractions_arg, repeats, out_dir, workers);
    if (inspect->parsed()) return cmd_inspect_manifold(config_path, out_csv);
    if (tune->parsed()) return cmd_tune(config_path, grid_exp, out_dir, workers);
  } catch (const mhr::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
