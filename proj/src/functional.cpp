#include "majflow/functional.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "majflow/errors.hpp"

namespace majflow {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0) || alpha == 1.0 || std::isnan(alpha))
    throw invalid_input("alpha must lie in (0,1) or (1,inf); use shannon for alpha = 1");
}

std::string num(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

}  // namespace

std::string EntropyFunctional::name() const {
  switch (kind) {
    case FunctionalKind::shannon: return "shannon";
    case FunctionalKind::renyi: return "renyi:alpha=" + num(alpha);
    case FunctionalKind::tsallis: return "tsallis:alpha=" + num(alpha);
    case FunctionalKind::unified: return "unified:alpha=" + num(alpha) + ",s=" + num(s);
    case FunctionalKind::min_entropy: return "minent";
    case FunctionalKind::f_entropy: return "f_entropy";
    case FunctionalKind::concurrence: return "concurrence";
    case FunctionalKind::guesswork: {
      std::string out = "guesswork:c=";
      for (std::size_t i = 0; i < costs.size(); ++i)
        out += (i ? ";" : "") + num(costs[i]);
      return out;
    }
    case FunctionalKind::distinct_outcomes:
      return "trials:N=" + std::to_string(trials) +
             (symbols ? ",M=" + std::to_string(symbols) : "");
    case FunctionalKind::graph_components: return "graph";
  }
  return "?";
}

EntropyFunctional shannon() { return {}; }

EntropyFunctional renyi(double alpha) {
  if (std::isinf(alpha) && alpha > 0) return min_entropy();
  check_alpha(alpha);
  EntropyFunctional F;
  F.kind = FunctionalKind::renyi;
  F.alpha = alpha;
  return F;
}

EntropyFunctional tsallis(double alpha) {
  check_alpha(alpha);
  if (std::isinf(alpha)) throw invalid_input("tsallis alpha must be finite");
  EntropyFunctional F;
  F.kind = FunctionalKind::tsallis;
  F.alpha = alpha;
  return F;
}

EntropyFunctional unified(double alpha, double s) {
  check_alpha(alpha);
  if (std::isinf(alpha)) throw invalid_input("unified alpha must be finite");
  if (s == 0.0 || !std::isfinite(s)) throw invalid_input("unified s must be finite and nonzero");
  EntropyFunctional F;
  F.kind = FunctionalKind::unified;
  F.alpha = alpha;
  F.s = s;
  return F;
}

EntropyFunctional min_entropy() {
  EntropyFunctional F;
  F.kind = FunctionalKind::min_entropy;
  F.alpha = std::numeric_limits<double>::infinity();
  return F;
}

EntropyFunctional f_entropy(std::function<double(double)> f,
                            std::function<double(double)> fprime) {
  if (!f || !fprime) throw invalid_input("f_entropy needs f and f'");
  if (std::abs(f(0.0)) > 1e-12 || std::abs(f(1.0)) > 1e-12)
    throw invalid_input("f_entropy requires f(0) = f(1) = 0");
  EntropyFunctional F;
  F.kind = FunctionalKind::f_entropy;
  F.f = std::move(f);
  F.fprime = std::move(fprime);
  return F;
}

EntropyFunctional concurrence() {
  EntropyFunctional F;
  F.kind = FunctionalKind::concurrence;
  return F;
}

EntropyFunctional guesswork(std::vector<double> costs) {
  if (costs.empty()) throw invalid_input("guesswork needs a cost list");
  if (costs.front() < 0.0) throw invalid_input("guesswork costs must be >= 0");
  for (std::size_t i = 1; i < costs.size(); ++i)
    if (costs[i] < costs[i - 1]) throw invalid_input("guesswork costs must be nondecreasing");
  EntropyFunctional F;
  F.kind = FunctionalKind::guesswork;
  F.costs = std::move(costs);
  return F;
}

EntropyFunctional distinct_outcomes(int trials, int symbols) {
  if (trials < 1) throw invalid_input("number of trials must be >= 1");
  if (symbols < 0) throw invalid_input("number of symbols must be >= 0");
  EntropyFunctional F;
  F.kind = FunctionalKind::distinct_outcomes;
  F.trials = trials;
  F.symbols = symbols;
  return F;
}

EntropyFunctional graph_components() {
  EntropyFunctional F;
  F.kind = FunctionalKind::graph_components;
  return F;
}

EntropyFunctional parse_functional(const std::string& text) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  std::map<std::string, std::string> kv;
  if (colon != std::string::npos) {
    std::stringstream ss(text.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw invalid_input("bad parameter '" + item + "'");
      kv[item.substr(0, eq)] = item.substr(eq + 1);
    }
  }
  auto real = [&](const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw invalid_input(head + " needs parameter " + key);
    if (it->second == "inf") return std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(it->second, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != it->second.size()) throw invalid_input("bad number '" + it->second + "'");
    return v;
  };
  auto integer = [&](const std::string& key) {
    const double v = real(key);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw invalid_input(key + " must be an integer");
    return static_cast<int>(v);
  };

  if (head == "shannon") return shannon();
  if (head == "renyi") return renyi(real("alpha"));
  if (head == "tsallis") return tsallis(real("alpha"));
  if (head == "unified") return unified(real("alpha"), real("s"));
  if (head == "minent" || head == "min_entropy") return min_entropy();
  if (head == "concurrence") return concurrence();
  if (head == "graph" || head == "graph_components") return graph_components();
  if (head == "trials" || head == "distinct_outcomes")
    return distinct_outcomes(integer("N"), kv.count("M") ? integer("M") : 0);
  if (head == "guesswork") {
    const auto it = kv.find("c");
    if (it == kv.end()) throw invalid_input("guesswork needs c=c1;c2;...");
    std::vector<double> c;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ';')) {
      kv["_c"] = item;
      c.push_back(real("_c"));
    }
    return guesswork(std::move(c));
  }
  throw invalid_input("unknown functional '" + head + "'");
}

}  // namespace majflow
