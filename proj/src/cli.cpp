#include "gdl/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "gdl/dictionary.hpp"
#include "gdl/embedding.hpp"
#include "gdl/io.hpp"
#include "gdl/sbm.hpp"

namespace gdl {
namespace {

struct TrainFlags {
  int atoms = 3;
  int order = 6;
  double lambda = 1e-3;
  double mu = 1e-3;
  double alpha = 0.5;
  int epochs = 10;
  int batch = 16;
  double lr_c = 0.1;
  double lr_a = -1.0;  // negative: pick from alpha
  double lr_h = 0.001;
  std::string optimizer = "adam";
  bool learn_h = false;
  bool nonneg = false;
};

struct SolverFlags {
  std::uint64_t seed = 0;
  int restarts = 1;
  double tol = 1e-6;
};

void add_solver_flags(CLI::App* cmd, SolverFlags& f) {
  cmd->add_option("--seed", f.seed, "random seed");
  cmd->add_option("--restarts", f.restarts, "coupling solver restarts")->check(CLI::PositiveNumber);
  cmd->add_option("--tol", f.tol, "relative BCD tolerance")->check(CLI::NonNegativeNumber);
}

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
  cmd->add_option("--atoms", f.atoms, "number of atoms S")->check(CLI::PositiveNumber);
  cmd->add_option("--order", f.order, "atom order N")->check(CLI::PositiveNumber);
  cmd->add_option("--lambda", f.lambda, "structure embedding regularizer")->check(CLI::NonNegativeNumber);
  cmd->add_option("--mu", f.mu, "weight embedding regularizer")->check(CLI::NonNegativeNumber);
  cmd->add_option("--alpha", f.alpha, "FGW trade-off")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--epochs", f.epochs, "passes over the dataset")->check(CLI::NonNegativeNumber);
  cmd->add_option("--batch", f.batch, "minibatch size")->check(CLI::PositiveNumber);
  cmd->add_option("--lr-c", f.lr_c, "structure atom step size")->check(CLI::NonNegativeNumber);
  cmd->add_option("--lr-a", f.lr_a, "feature atom step size (default from alpha)");
  cmd->add_option("--lr-h", f.lr_h, "weight atom step size")->check(CLI::NonNegativeNumber);
  cmd->add_option("--optimizer", f.optimizer, "sgd or adam")->check(CLI::IsMember({"sgd", "adam"}));
  cmd->add_flag("--learn-h", f.learn_h, "also learn node-weight atoms");
  cmd->add_flag("--nonneg", f.nonneg, "clip atoms to nonnegative entries");
}

UnmixOptions unmix_options(const SolverFlags& s) {
  UnmixOptions o;
  o.tol = s.tol;
  o.gw.restarts = s.restarts;
  o.gw.seed = s.seed;
  return o;
}

TrainConfig train_config(const TrainFlags& f, const SolverFlags& s) {
  TrainConfig c;
  c.S = f.atoms;
  c.N = f.order;
  c.lambda = f.lambda;
  c.mu = f.mu;
  c.alpha = f.alpha;
  c.epochs = f.epochs;
  c.batch_size = f.batch;
  c.lr_C = f.lr_c;
  if (f.lr_a >= 0.0) c.lr_A = f.lr_a;
  c.lr_h = f.lr_h;
  c.optimizer = f.optimizer == "sgd" ? Optimizer::Sgd : Optimizer::Adam;
  c.learn_h = f.learn_h;
  c.nonneg = f.nonneg;
  c.seed = s.seed;
  c.unmix = unmix_options(s);
  return c;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path);
  out << std::setprecision(17);
  return out;
}

void write_matrix_csv(const Matrix& m, const std::string& path) {
  std::ofstream out = open_out(path);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << m(i, j);
    out << '\n';
  }
}

void write_loss_csv(const LossTrace& t, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "step,loss,running_mean,event\n";
  for (std::size_t i = 0; i < t.size(); ++i)
    out << i << ',' << t.loss()[i] << ',' << t.running_mean()[i] << ',' << t.events()[i] << '\n';
}

std::vector<GraphRepr> load_nonempty(const std::string& path) {
  std::vector<GraphRepr> data = read_dataset(path);
  if (data.empty()) fail(ErrorCode::EmptyDataset, path + " holds no graphs");
  return data;
}

std::vector<Embedding> embed_all(const std::vector<GraphRepr>& data, const Dictionary& d, const SolverFlags& s,
                                 std::vector<double>* losses = nullptr) {
  const std::vector<UnmixResult> fits = unmix_batch(data, d, unmix_options(s));
  std::vector<Embedding> out;
  for (const UnmixResult& r : fits) {
    out.push_back(r.embedding);
    if (losses) losses->push_back(r.loss);
  }
  return out;
}

Matrix stack_w(const std::vector<Embedding>& es) {
  Matrix P(static_cast<Eigen::Index>(es.size()), es.front().w.size());
  for (std::size_t i = 0; i < es.size(); ++i) P.row(static_cast<Eigen::Index>(i)) = es[i].w.transpose();
  return P;
}

DistanceMode parse_mode(const std::string& m) {
  if (m == "mahalanobis") return DistanceMode::Mahalanobis;
  if (m == "gw_embedded") return DistanceMode::GwEmbedded;
  return DistanceMode::GwInput;
}

std::vector<int> d1_orders(int lo, int hi) { return order_grid(lo, hi, 5); }

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Graph dictionary learning under (fused) Gromov-Wasserstein"};
  app.require_subcommand(1);

  // gen
  std::string gen_kind = "d1", gen_out;
  int per_class = 100, count = 150, min_order = 10, max_order = 60;
  double p = 0.1;
  SolverFlags gen_s;
  auto* gen = app.add_subcommand("gen", "generate a synthetic SBM dataset");
  gen->add_option("--dataset", gen_kind, "d1 or d2")->check(CLI::IsMember({"d1", "d2"}));
  gen->add_option("--per-class", per_class, "graphs per class (d1)")->check(CLI::PositiveNumber);
  gen->add_option("--count", count, "number of graphs (d2)")->check(CLI::PositiveNumber);
  gen->add_option("--min-order", min_order)->check(CLI::PositiveNumber);
  gen->add_option("--max-order", max_order)->check(CLI::PositiveNumber);
  gen->add_option("--p", p, "inter-cluster edge probability")->check(CLI::Range(0.0, 1.0));
  gen->add_option("--seed", gen_s.seed);
  gen->add_option("--out", gen_out, "output dataset (JSON lines)")->required();

  // fit
  TrainFlags fit_f;
  SolverFlags fit_s;
  std::string fit_data, fit_out, fit_loss;
  auto* fitc = app.add_subcommand("fit", "learn a dictionary");
  fitc->add_option("--data", fit_data)->required();
  fitc->add_option("--out", fit_out, "output dictionary (JSON)")->required();
  fitc->add_option("--loss", fit_loss, "loss trace CSV");
  add_train_flags(fitc, fit_f);
  add_solver_flags(fitc, fit_s);

  // embed
  SolverFlags emb_s;
  std::string emb_data, emb_dict, emb_out;
  auto* emb = app.add_subcommand("embed", "unmix graphs onto a dictionary");
  emb->add_option("--data", emb_data)->required();
  emb->add_option("--dict", emb_dict)->required();
  emb->add_option("--out", emb_out, "embeddings CSV")->required();
  add_solver_flags(emb, emb_s);

  // dist
  SolverFlags dist_s;
  std::string dist_data, dist_dict, dist_out, dist_mode = "mahalanobis";
  bool dist_squared = false;
  double dist_gamma = -1.0;
  auto* dist = app.add_subcommand("dist", "pairwise distance matrix");
  dist->add_option("--data", dist_data)->required();
  dist->add_option("--dict", dist_dict)->required();
  dist->add_option("--out", dist_out, "distance CSV")->required();
  dist->add_option("--mode", dist_mode)->check(CLI::IsMember({"mahalanobis", "gw_embedded", "gw_input"}));
  dist->add_flag("--squared", dist_squared, "report squared distances");
  dist->add_option("--gamma", dist_gamma, "emit the kernel exp(-gamma D) instead");
  add_solver_flags(dist, dist_s);

  // cluster
  SolverFlags cl_s;
  std::string cl_data, cl_dict, cl_out, cl_metric = "mahalanobis";
  int cl_k = 3, cl_restarts = 10;
  auto* cl = app.add_subcommand("cluster", "k-means on embeddings");
  cl->add_option("--data", cl_data)->required();
  cl->add_option("--dict", cl_dict)->required();
  cl->add_option("--out", cl_out, "labels CSV")->required();
  cl->add_option("--k", cl_k)->check(CLI::PositiveNumber);
  cl->add_option("--metric", cl_metric)->check(CLI::IsMember({"mahalanobis", "euclidean"}));
  cl->add_option("--kmeans-restarts", cl_restarts)->check(CLI::PositiveNumber);
  add_solver_flags(cl, cl_s);

  // stream
  TrainFlags st_f;
  st_f.optimizer = "sgd";
  SolverFlags st_s;
  std::string st_spec, st_out;
  int st_min = 10, st_max = 30;
  std::size_t st_window = 5;
  double st_rho = 1.5;
  auto* st = app.add_subcommand("stream", "online learning over a scripted SBM stream");
  st->add_option("--spec", st_spec, "stream spec JSON")->required();
  st->add_option("--out", st_out, "loss CSV")->required();
  st->add_option("--min-order", st_min)->check(CLI::PositiveNumber);
  st->add_option("--max-order", st_max)->check(CLI::PositiveNumber);
  st->add_option("--window", st_window)->check(CLI::PositiveNumber);
  st->add_option("--rho", st_rho);
  add_train_flags(st, st_f);
  add_solver_flags(st, st_s);

  // eval
  SolverFlags ev_s;
  std::string ev_data, ev_dict;
  auto* ev = app.add_subcommand("eval", "Pearson correlations between distance modes");
  ev->add_option("--data", ev_data)->required();
  ev->add_option("--dict", ev_dict)->required();
  add_solver_flags(ev, ev_s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: BadArgument: " << e.what() << '\n';
    return 2;
  }

  try {
    out << std::setprecision(10);
    if (*gen) {
      const auto orders = d1_orders(min_order, max_order);
      write_dataset(gen_kind == "d1" ? make_d1(per_class, orders, gen_s.seed, p)
                                     : make_d2(count, orders, gen_s.seed, p),
                    gen_out);
    } else if (*fitc) {
      const FitResult r = fit(load_nonempty(fit_data), train_config(fit_f, fit_s));
      save_dictionary(r.dictionary, fit_out);
      if (!fit_loss.empty()) write_loss_csv(r.trace, fit_loss);
      if (r.trace.size() > 0) out << "final_loss " << r.trace.loss().back() << '\n';
    } else if (*emb) {
      const auto data = load_nonempty(emb_data);
      const Dictionary d = load_dictionary(emb_dict);
      std::vector<double> losses;
      const auto es = embed_all(data, d, emb_s, &losses);
      std::ofstream f = open_out(emb_out);
      f << "index";
      for (Eigen::Index s = 0; s < d.size(); ++s) f << ",w" << s;
      if (d.has_weights())
        for (Eigen::Index s = 0; s < d.size(); ++s) f << ",v" << s;
      f << ",loss\n";
      for (std::size_t i = 0; i < es.size(); ++i) {
        f << i;
        for (Eigen::Index s = 0; s < d.size(); ++s) f << ',' << es[i].w[s];
        if (es[i].v)
          for (Eigen::Index s = 0; s < d.size(); ++s) f << ',' << (*es[i].v)[s];
        f << ',' << losses[i] << '\n';
      }
    } else if (*dist) {
      const auto data = load_nonempty(dist_data);
      const Dictionary d = load_dictionary(dist_dict);
      PairwiseOptions po;
      po.squared = dist_squared;
      po.gw.restarts = dist_s.restarts;
      po.gw.seed = dist_s.seed;
      if (d.has_weights()) po.h = Histogram::uniform(d.order());
      Matrix D = pairwise_matrix(d, embed_all(data, d, dist_s), parse_mode(dist_mode), &data, po);
      if (dist_gamma >= 0.0) D = kernel_matrix(D, dist_gamma);
      write_matrix_csv(D, dist_out);
    } else if (*cl) {
      const auto data = load_nonempty(cl_data);
      const Dictionary d = load_dictionary(cl_dict);
      const auto es = embed_all(data, d, cl_s);
      std::optional<Matrix> metric;
      if (cl_metric == "mahalanobis") metric = mahalanobis_matrix(d, Histogram::uniform(d.order()));
      const KMeansResult km = kmeans(stack_w(es), cl_k, metric, cl_s.seed, cl_restarts);
      std::ofstream f = open_out(cl_out);
      f << "index,label\n";
      for (std::size_t i = 0; i < km.labels.size(); ++i) f << i << ',' << km.labels[i] << '\n';
      std::vector<int> truth;
      for (const GraphRepr& g : data)
        if (g.label) truth.push_back(*g.label);
      out << "kmeans_cost " << km.cost << '\n';
      if (truth.size() == data.size()) out << "rand_index " << rand_index(km.labels, truth) << '\n';
    } else if (*st) {
      std::ifstream in(st_spec);
      if (!in) fail(ErrorCode::IoError, "cannot open " + st_spec);
      nlohmann::json spec;
      try {
        in >> spec;
      } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::ParseError, st_spec + ": " + e.what());
      }
      std::vector<std::pair<int, int>> segments;
      if (!spec.contains("segments") || !spec["segments"].is_array())
        fail(ErrorCode::ValidationError, "stream spec needs a 'segments' array");
      for (const auto& s : spec["segments"]) {
        if (!s.contains("class") || !s.contains("count") || !s["class"].is_number_integer() ||
            !s["count"].is_number_integer())
          fail(ErrorCode::ValidationError, "each segment needs integer 'class' and 'count'");
        segments.emplace_back(s["class"].get<int>(), s["count"].get<int>());
      }
      const TrainConfig cfg = train_config(st_f, st_s);
      const auto orders = d1_orders(st_min, st_max);
      std::mt19937_64 rng(st_s.seed ^ 0x9e3779b97f4a7c15ULL);
      std::uniform_int_distribution<std::size_t> pick(0, orders.size() - 1);
      std::size_t seg = 0;
      int emitted = 0;
      GraphSource source = [&]() {
        std::vector<GraphRepr> batch;
        while (static_cast<int>(batch.size()) < cfg.batch_size && seg < segments.size()) {
          if (emitted >= segments[seg].second) {
            ++seg;
            emitted = 0;
            continue;
          }
          batch.push_back(gen_d1_graph(segments[seg].first, orders[pick(rng)], rng));
          ++emitted;
        }
        return batch;
      };
      StreamOptions so;
      so.window = st_window;
      so.rho = st_rho;
      const StreamResult r = fit_stream(source, cfg, so);
      write_loss_csv(r.trace, st_out);
      out << "events";
      for (std::size_t e : r.events) out << ' ' << e;
      out << '\n';
    } else if (*ev) {
      const auto data = load_nonempty(ev_data);
      const Dictionary d = load_dictionary(ev_dict);
      const auto es = embed_all(data, d, ev_s);
      PairwiseOptions po;
      po.gw.restarts = ev_s.restarts;
      po.gw.seed = ev_s.seed;
      if (d.has_weights()) po.h = Histogram::uniform(d.order());
      const auto maha = upper_triangle(pairwise_matrix(d, es, DistanceMode::Mahalanobis, &data, po));
      const auto emb_gw = upper_triangle(pairwise_matrix(d, es, DistanceMode::GwEmbedded, &data, po));
      const auto in_gw = upper_triangle(pairwise_matrix(d, es, DistanceMode::GwInput, &data, po));
      out << "pearson_mahalanobis_gw_embedded " << pearson(maha, emb_gw) << '\n';
      out << "pearson_gw_input_mahalanobis " << pearson(in_gw, maha) << '\n';
      out << "pearson_gw_input_gw_embedded " << pearson(in_gw, emb_gw) << '\n';
    }
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: Internal: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace gdl
