#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hybridloss/chain.hpp"
#include "hybridloss/consistency.hpp"
#include "hybridloss/dataio.hpp"
#include "hybridloss/losses.hpp"

namespace py = pybind11;
using namespace hybridloss;

namespace {

ChainPotentials make_potentials(const std::vector<std::vector<double>>& unary,
                                const std::vector<std::vector<double>>& transition) {
  if (unary.empty()) throw std::invalid_argument("unary potentials must be nonempty");
  std::size_t c = unary.front().size();
  if (c == 0 || transition.size() != c) {
    throw std::invalid_argument("transition must be num_labels x num_labels");
  }
  ChainPotentials pot(unary.size(), c);
  for (std::size_t j = 0; j < unary.size(); ++j) {
    if (unary[j].size() != c) throw std::invalid_argument("ragged unary potentials");
    for (std::size_t s = 0; s < c; ++s) pot.unary_at(j, static_cast<int>(s)) = unary[j][s];
  }
  for (std::size_t s = 0; s < c; ++s) {
    if (transition[s].size() != c) throw std::invalid_argument("ragged transition matrix");
    for (std::size_t t = 0; t < c; ++t) {
      pot.trans_at(static_cast<int>(s), static_cast<int>(t)) = transition[s][t];
    }
  }
  return pot;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "hybrid log/hinge loss toolkit";
  m.attr("__version__") = "1.0.0";

  m.def("hinge_loss", &hinge_loss, py::arg("scores"), py::arg("label"),
        "Multiclass hinge loss max(0, 1 - margin).");
  m.def("log_loss", &log_loss, py::arg("scores"), py::arg("label"),
        "Multinomial log loss -f_y + logsumexp(f).");
  m.def(
      "hybrid_loss",
      [](const ScoreVector& f, int y, double alpha) {
        return hybrid_loss(f, y, HybridParam(alpha));
      },
      py::arg("scores"), py::arg("label"), py::arg("alpha"),
      "alpha * log loss + (1 - alpha) * hinge loss.");
  m.def("grad_log_loss", &grad_log_loss, py::arg("scores"), py::arg("label"));
  m.def("subgrad_hinge_loss", &subgrad_hinge_loss, py::arg("scores"), py::arg("label"));
  m.def(
      "subgrad_hybrid_loss",
      [](const ScoreVector& f, int y, double alpha) {
        return subgrad_hybrid_loss(f, y, HybridParam(alpha));
      },
      py::arg("scores"), py::arg("label"), py::arg("alpha"));
  m.def(
      "conditional_risk",
      [](const ScoreVector& f, const std::vector<double>& d, double alpha) {
        return conditional_risk(f, LabelDistribution(d), HybridParam(alpha));
      },
      py::arg("scores"), py::arg("distribution"), py::arg("alpha"),
      "Expected hybrid loss under a label distribution.");

  m.def(
      "alpha_threshold",
      [](const std::vector<double>& d) {
        ConsistencyVerdict v = alpha_threshold(LabelDistribution(d));
        py::dict out;
        out["threshold"] = v.threshold;
        out["dominant"] = v.dominant;
        return out;
      },
      py::arg("distribution"),
      "Smallest alpha (exclusive) with guaranteed aligned risk minimizers.");
  m.def(
      "minimize_conditional_risk",
      [](const std::vector<double>& d, double alpha) {
        return minimize_conditional_risk(LabelDistribution(d), HybridParam(alpha));
      },
      py::arg("distribution"), py::arg("alpha"),
      "Score vector minimizing the conditional risk, max component 0.");
  m.def(
      "is_aligned",
      [](const ScoreVector& f, const std::vector<double>& d) {
        return is_aligned(f, LabelDistribution(d));
      },
      py::arg("scores"), py::arg("distribution"),
      "True iff every argmax score belongs to a most probable label.");

  m.def(
      "viterbi",
      [](const std::vector<std::vector<double>>& unary,
         const std::vector<std::vector<double>>& transition) {
        return viterbi(make_potentials(unary, transition));
      },
      py::arg("unary"), py::arg("transition"),
      "Highest-scoring labeling of a chain (lowest label ids on ties).");
  m.def(
      "log_partition",
      [](const std::vector<std::vector<double>>& unary,
         const std::vector<std::vector<double>>& transition) {
        return log_partition(make_potentials(unary, transition));
      },
      py::arg("unary"), py::arg("transition"),
      "Log of the sum of exp(score) over all labelings.");

  m.def(
      "chunk_metrics",
      [](const std::vector<std::string>& gold, const std::vector<std::string>& predicted) {
        ChunkMetrics r = chunk_metrics(gold, predicted);
        py::dict out;
        out["accuracy"] = r.accuracy;
        out["precision"] = r.precision;
        out["recall"] = r.recall;
        out["f1"] = r.f1;
        return out;
      },
      py::arg("gold"), py::arg("predicted"),
      "Token accuracy and chunk precision/recall/F1 in percent.");
}
