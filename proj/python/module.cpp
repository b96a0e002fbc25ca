#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>
#include <vector>

#include "subrank/core.hpp"
#include "subrank/error.hpp"
#include "subrank/io.hpp"
#include "subrank/linear.hpp"
#include "subrank/lovasz.hpp"
#include "subrank/metrics.hpp"
#include "subrank/model_io.hpp"
#include "subrank/nested.hpp"
#include "subrank/sampler.hpp"

namespace py = pybind11;
using namespace subrank;

namespace {

using Lists = std::vector<std::vector<double>>;

std::vector<std::size_t> to_order(const Ranking& r) { return {r.order().begin(), r.order().end()}; }

std::vector<ScoreList> to_score_lists(const Lists& raw) { return {raw.begin(), raw.end()}; }

std::vector<double> to_vector(std::span<const double> s) { return {s.begin(), s.end()}; }

TrainSettings make_settings(std::size_t samples, std::size_t burn_in, std::size_t thinning,
                            const std::string& acceptance, const std::string& backend,
                            std::uint64_t seed, unsigned threads, bool record_objective) {
  TrainSettings s;
  s.expectation.backend = parse_backend(backend);
  s.expectation.chain.num_samples = samples;
  s.expectation.chain.burn_in = burn_in;
  s.expectation.chain.thinning = thinning;
  s.expectation.chain.acceptance_rule = parse_acceptance_rule(acceptance);
  s.expectation.chain.validate();
  s.seed = seed;
  s.threads = threads;
  s.record_objective = record_objective;
  return s;
}

py::dict log_dict(const TrainingLog& log) {
  py::dict d;
  d["objective"] = log.objective;
  d["snapshots"] = log.snapshots;
  d["epochs_run"] = log.epochs_run;
  d["converged"] = log.converged;
  return d;
}

ConcaveGain gain_of(const std::string& spec) { return ConcaveGain::parse(spec); }

}  // namespace

PYBIND11_MODULE(_subrank, m) {
  m.doc() = "Unsupervised rank aggregation with the Lovasz-Bregman divergence";

  auto base = py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<InvariantViolation>(m, "InvariantViolation", PyExc_RuntimeError);

  py::class_<QueryInstance>(m, "Query")
      .def(py::init([](std::string id, const Lists& lists, std::optional<std::vector<double>> relevance) {
             return QueryInstance(std::move(id), to_score_lists(lists), std::move(relevance));
           }),
           py::arg("query_id"), py::arg("lists"), py::arg("relevance") = py::none())
      .def_property_readonly("id", &QueryInstance::id)
      .def_property_readonly("num_lists", &QueryInstance::num_lists)
      .def_property_readonly("num_candidates", &QueryInstance::num_candidates)
      .def_property_readonly("lists",
                             [](const QueryInstance& q) {
                               Lists out;
                               for (const auto& l : q.lists()) out.push_back(to_vector(l.values()));
                               return out;
                             })
      .def_property_readonly("relevance", &QueryInstance::relevance)
      .def("__repr__", [](const QueryInstance& q) {
        return "<Query " + q.id() + " K=" + std::to_string(q.num_lists()) +
               " N=" + std::to_string(q.num_candidates()) + ">";
      });

  py::class_<LinearModel>(m, "LinearModel")
      .def(py::init([](std::vector<double> w, const std::string& gain) {
             return LinearModel{SimplexWeights(std::move(w)), gain_of(gain), {}};
           }),
           py::arg("weights"), py::arg("gain") = "logistic")
      .def_property_readonly("weights", [](const LinearModel& m) { return to_vector(m.w.values()); })
      .def_property_readonly("gain", [](const LinearModel& m) { return m.gain.spec(); });

  py::class_<NestedModel>(m, "NestedModel")
      .def(py::init([](const Lists& w1, std::vector<double> w2, const std::string& gain,
                       const std::string& phi1, const std::string& phi2) {
             std::vector<SimplexWeights> rows(w1.begin(), w1.end());
             return NestedModel{std::move(rows), SimplexWeights(std::move(w2)), gain_of(gain),
                                parse_activation(phi1), parse_activation(phi2), {}};
           }),
           py::arg("W1"), py::arg("W2"), py::arg("gain") = "logistic",
           py::arg("phi1") = "shifted_logistic", py::arg("phi2") = "shifted_logistic")
      .def_property_readonly("W1",
                             [](const NestedModel& m) {
                               Lists out;
                               for (const auto& row : m.W1) out.push_back(to_vector(row.values()));
                               return out;
                             })
      .def_property_readonly("W2", [](const NestedModel& m) { return to_vector(m.W2.values()); })
      .def_property_readonly("phi1", [](const NestedModel& m) { return std::string(to_string(m.phi1)); })
      .def_property_readonly("phi2", [](const NestedModel& m) { return std::string(to_string(m.phi2)); })
      .def_property_readonly("gain", [](const NestedModel& m) { return m.gain.spec(); })
      .def("aggregate_weights",
           [](const NestedModel& m) { return to_vector(m.aggregate_weights().values()); });

  m.def("ranking_from_scores",
        [](const std::vector<double>& x) { return to_order(ranking_from_scores(x)); }, py::arg("scores"));

  m.def("lb_divergence",
        [](const std::vector<double>& x, std::vector<std::size_t> order, const std::string& gain) {
          return lb_divergence(ScoreList(x), Ranking(std::move(order)), gain_of(gain));
        },
        py::arg("scores"), py::arg("order"), py::arg("gain") = "logistic");
  m.def("lb_bound",
        [](const std::vector<double>& x, const std::string& gain) { return lb_bound(ScoreList(x), gain_of(gain)); },
        py::arg("scores"), py::arg("gain") = "logistic");
  m.def("lovasz_extension",
        [](const std::vector<double>& x, const std::string& gain) {
          return lovasz_extension(ScoreList(x), gain_of(gain));
        },
        py::arg("scores"), py::arg("gain") = "logistic");
  m.def("gain_increments",
        [](const std::string& gain, std::size_t n) { return gain_of(gain).increments(n); },
        py::arg("gain"), py::arg("n"));

  m.def("expected_divergences",
        [](const Lists& lists, std::vector<double> weights, const std::string& gain, bool exact,
           std::size_t samples, std::size_t burn_in, std::uint64_t seed) {
          const auto owned = to_score_lists(lists);
          const EnergyContext ctx(owned, SimplexWeights(std::move(weights)), gain_of(gain));
          if (exact) return expected_divergences(ctx, enumerate_distribution(ctx));
          ChainConfig cfg;
          cfg.num_samples = samples;
          cfg.burn_in = burn_in;
          cfg.rng_seed = seed;
          cfg.validate();
          return sample_expectation(ctx, cfg);
        },
        py::arg("lists"), py::arg("weights"), py::arg("gain") = "logistic", py::arg("exact") = false,
        py::arg("samples") = 50, py::arg("burn_in") = 100, py::arg("seed") = 0);

  m.def("train_linear",
        [](const std::vector<QueryInstance>& data, double mu, double lambda_, std::size_t epochs,
           double tolerance, bool shuffle, const std::string& gain, std::size_t samples,
           std::size_t burn_in, std::size_t thinning, const std::string& acceptance,
           const std::string& backend, std::uint64_t seed, unsigned threads, bool record_objective) {
          LinearHyper h;
          h.mu = mu;
          h.lambda = lambda_;
          h.epochs = epochs;
          h.tolerance = tolerance;
          h.shuffle = shuffle;
          h.validate();
          const auto settings =
              make_settings(samples, burn_in, thinning, acceptance, backend, seed, threads, record_objective);
          const auto result = [&] {
            py::gil_scoped_release release;
            return train_linear(data, h, gain_of(gain), settings);
          }();
          return py::make_tuple(result.model, log_dict(result.log));
        },
        py::arg("queries"), py::arg("mu") = 0.1, py::arg("lambda_") = 0.01, py::arg("epochs") = 20,
        py::arg("tolerance") = 1e-5, py::arg("shuffle") = false, py::arg("gain") = "logistic",
        py::arg("samples") = 50, py::arg("burn_in") = 100, py::arg("thinning") = 1,
        py::arg("acceptance") = "standard_metropolis", py::arg("backend") = "metropolis",
        py::arg("seed") = 0, py::arg("threads") = 1, py::arg("record_objective") = true);

  m.def("train_nested",
        [](const std::vector<QueryInstance>& data, std::optional<std::size_t> k2, double mu, double lambda1,
           double lambda2, std::size_t epochs, double tolerance, bool shuffle, const std::string& phi1,
           const std::string& phi2, const std::string& sampling, const std::string& gain,
           std::size_t samples, std::size_t burn_in, std::size_t thinning, const std::string& acceptance,
           const std::string& backend, std::uint64_t seed, unsigned threads, bool record_objective) {
          if (data.empty()) throw InvalidInput("no training queries");
          NestedHyper h;
          h.mu = mu;
          h.lambda1 = lambda1;
          h.lambda2 = lambda2;
          h.epochs = epochs;
          h.tolerance = tolerance;
          h.shuffle = shuffle;
          h.sampling = parse_nested_sampling(sampling);
          h.validate();
          const auto settings =
              make_settings(samples, burn_in, thinning, acceptance, backend, seed, threads, record_objective);
          const std::size_t units = k2.value_or(default_hidden_units(data.front().num_lists()));
          const auto a1 = parse_activation(phi1);
          const auto a2 = parse_activation(phi2);
          const auto result = [&] {
            py::gil_scoped_release release;
            return train_nested(data, units, h, gain_of(gain), a1, a2, settings);
          }();
          return py::make_tuple(result.model, log_dict(result.log));
        },
        py::arg("queries"), py::arg("k2") = py::none(), py::arg("mu") = 0.1, py::arg("lambda1") = 0.01,
        py::arg("lambda2") = 0.01, py::arg("epochs") = 20, py::arg("tolerance") = 1e-5,
        py::arg("shuffle") = false, py::arg("phi1") = "shifted_logistic", py::arg("phi2") = "shifted_logistic",
        py::arg("sampling") = "shared_aggregate", py::arg("gain") = "logistic", py::arg("samples") = 50,
        py::arg("burn_in") = 100, py::arg("thinning") = 1, py::arg("acceptance") = "standard_metropolis",
        py::arg("backend") = "metropolis", py::arg("seed") = 0, py::arg("threads") = 1,
        py::arg("record_objective") = true);

  m.def("infer", [](const LinearModel& model, const QueryInstance& q) { return to_order(infer(model, q)); },
        py::arg("model"), py::arg("query"));
  m.def("infer", [](const NestedModel& model, const QueryInstance& q) { return to_order(infer(model, q)); },
        py::arg("model"), py::arg("query"));
  m.def("aggregate_scores",
        [](const LinearModel& model, const QueryInstance& q) { return aggregate_scores(model, q); },
        py::arg("model"), py::arg("query"));
  m.def("aggregate_scores",
        [](const NestedModel& model, const QueryInstance& q) { return aggregate_scores(model, q); },
        py::arg("model"), py::arg("query"));

  m.def("baseline_average", [](const QueryInstance& q) { return to_order(baseline_average(q)); },
        py::arg("query"));
  m.def("baseline_borda", [](const QueryInstance& q) { return to_order(baseline_borda(q)); },
        py::arg("query"));

  m.def("ndcg_at_k",
        [](std::vector<std::size_t> order, std::vector<double> relevance, std::size_t k,
           const std::string& discount) {
          return ndcg_at_k(Ranking(std::move(order)), RelevanceJudgments(std::move(relevance)), k,
                           gain_of(discount));
        },
        py::arg("order"), py::arg("relevance"), py::arg("k"), py::arg("discount") = "log2");

  m.def("load_dataset",
        [](const std::filesystem::path& path, bool strict, bool normalize) {
          ParseOptions opts;
          opts.strict = strict;
          opts.normalize = normalize;
          return load_dataset(path, opts).queries;
        },
        py::arg("path"), py::arg("strict") = true, py::arg("normalize") = false);

  m.def("synth_planted",
        [](std::size_t num_queries, std::size_t num_candidates, std::vector<double> noise_levels,
           int max_grade, std::uint64_t seed) {
          SynthConfig cfg;
          cfg.num_queries = num_queries;
          cfg.num_candidates = num_candidates;
          cfg.noise_levels = std::move(noise_levels);
          cfg.max_grade = max_grade;
          cfg.seed = seed;
          return synth_planted(cfg).queries;
        },
        py::arg("num_queries") = 100, py::arg("num_candidates") = 10,
        py::arg("noise_levels") = std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0}, py::arg("max_grade") = 4,
        py::arg("seed") = 0);

  m.def("save_model", [](const std::filesystem::path& path, const LinearModel& model) { save_model(path, model); },
        py::arg("path"), py::arg("model"));
  m.def("save_model", [](const std::filesystem::path& path, const NestedModel& model) { save_model(path, model); },
        py::arg("path"), py::arg("model"));
  m.def("load_model",
        [](const std::filesystem::path& path) -> py::object {
          const auto model = load_model(path);
          if (const auto* lin = std::get_if<LinearModel>(&model)) return py::cast(*lin);
          return py::cast(std::get<NestedModel>(model));
        },
        py::arg("path"));
  m.def("serialize_model", [](const LinearModel& model) { return serialize_model(model); }, py::arg("model"));
  m.def("serialize_model", [](const NestedModel& model) { return serialize_model(model); }, py::arg("model"));
}
