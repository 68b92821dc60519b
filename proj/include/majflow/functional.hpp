#pragma once

#include <functional>
#include <string>
#include <vector>

namespace majflow {

enum class FunctionalKind {
  shannon,
  renyi,
  tsallis,
  unified,
  min_entropy,
  f_entropy,
  concurrence,
  guesswork,
  distinct_outcomes,
  graph_components,
};

// Tagged description of a Schur-concave functional. Build through the factory
// functions below, which validate parameters.
struct EntropyFunctional {
  FunctionalKind kind = FunctionalKind::shannon;
  double alpha = 0.0;  // renyi, tsallis, unified
  double s = 0.0;      // unified
  std::vector<double> costs;  // guesswork, nondecreasing
  int trials = 0;             // distinct_outcomes: N
  int symbols = 0;            // distinct_outcomes: M (0 = take the dimension)
  std::function<double(double)> f, fprime;  // f_entropy: H = -sum f(p_i)

  std::string name() const;
};

EntropyFunctional shannon();
// alpha = +infinity yields the min-entropy.
EntropyFunctional renyi(double alpha);
EntropyFunctional tsallis(double alpha);
EntropyFunctional unified(double alpha, double s);
EntropyFunctional min_entropy();
// f strictly convex on [0,1] with f(0) = f(1) = 0 (checked to 1e-12).
EntropyFunctional f_entropy(std::function<double(double)> f,
                            std::function<double(double)> fprime);
EntropyFunctional concurrence();
EntropyFunctional guesswork(std::vector<double> costs);
EntropyFunctional distinct_outcomes(int trials, int symbols = 0);
EntropyFunctional graph_components();

// Parses "shannon", "renyi:alpha=2", "unified:alpha=0.5,s=0.5",
// "guesswork:c=1;2;3", "trials:N=3", "graph", "minent", "concurrence",
// "tsallis:alpha=2". f_entropy has no textual form.
EntropyFunctional parse_functional(const std::string& text);

}  // namespace majflow
