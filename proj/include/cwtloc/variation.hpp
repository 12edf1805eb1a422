#pragma once

#include <string>

#include "cwtloc/grid.hpp"
#include "json.hpp"

namespace cwtloc {

// W-gradient of v^S(ln|w|) + v^W(ln|w'|), assuming e^S(ln|w|) = 0.
GridFunction variation_scale_term(const GridFunction& u);
// W-gradient of v^S(i d/dw) + v^W(i w d/dw) |u/w|^2/|u|^2, assuming the
// time expectations vanish.
GridFunction variation_time_term(const GridFunction& u);
GridFunction unconstrained_variation(const GridFunction& u);

// W-gradients of e^S(ln|w|) and e^S(i d/dw), up to positive factors.
struct ConstraintGradients {
  GridFunction scale;
  GridFunction time;
};
ConstraintGradients constraint_gradients(const GridFunction& u);

struct VariationField {
  GridFunction field;
  double lambda = 0.0;
  double mu = 0.0;
  bool constrained = false;
  double gram_condition = 1.0;
  bool degenerate = false;
  double mu_general = 0.0;  // mu from the full 2x2 solve
  double res_scale = 0.0;
  double res_time = 0.0;
  double relative_norm = 0.0;  // |field|_W / |u|_W
};

constexpr double kMaxGramCondition = 1e12;

// Throws Degenerate when the Gram condition exceeds kMaxGramCondition unless
// allow_degenerate is set, in which case a least-squares field is returned.
VariationField constrained_variation(const GridFunction& u, bool allow_degenerate = false);
VariationField unconstrained_field(const GridFunction& u);

enum class Functional { L, vA, vB, eLn, eTime };

const char* functional_name(Functional f);
Functional parse_functional(const std::string& name);

double evaluate_functional(Functional f, const GridFunction& u);
// Re<gradient, h> from the closed-form variations.
double analytic_gateaux(Functional f, const GridFunction& u, const GridFunction& h);
// (F(u + eps h) - F(u - eps h)) / (2 eps); eps <= 0 picks 1e-5 |u|_S / |h|_S.
double finite_difference_gateaux(Functional f, const GridFunction& u, const GridFunction& h,
                                 double eps = 0.0);

void to_json(nlohmann::json& j, const VariationField& v);
void write_variation(const VariationField& v, const std::string& csv_path, const std::string& json_path);

}  // namespace cwtloc
