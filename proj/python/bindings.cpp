// Python bindings: groups, automata, growth, patches and colourings.
// Words cross the boundary as strings ("a b A", "1" for the identity) and
// patches as their text formats.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <random>

#include "hypsft/errors.hpp"
#include "hypsft/fsa.hpp"
#include "hypsft/growth.hpp"
#include "hypsft/oracle.hpp"
#include "hypsft/population.hpp"
#include "hypsft/sft.hpp"
#include "hypsft/shelling.hpp"

namespace py = pybind11;
using namespace hypsft;

namespace {

py::list violations(const std::vector<Violation>& v) {
  py::list out;
  for (const auto& x : v) out.append(py::make_tuple(x.kind, x.cell, x.detail));
  return out;
}

py::dict growth_dict(const GrowthData& g) {
  py::dict d;
  d["lambda_lo"] = g.lambda.lo.str(30);
  d["lambda_hi"] = g.lambda.hi.str(30);
  d["lambda"] = static_cast<double>(g.lambda.mid());
  std::vector<double> mu;
  std::vector<std::string> cls;
  for (std::size_t s = 0; s < g.mu.size(); ++s) {
    mu.push_back(static_cast<double>(g.mu[s]));
    cls.push_back(to_string(g.partition.cls[s]));
  }
  d["mu"] = mu;
  d["classes"] = cls;
  d["residual"] = static_cast<double>(g.residual);
  return d;
}

RuleDictionary dictionary_for(const GroupOracle& o, const ShortlexFsa& fsa, int delta, int rho) {
  return build_exact_rule_dictionary(o, fsa, delta, rho);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Shellings and populated patches on word-hyperbolic groups";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InputError>(m, "InputError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<ResourceError>(m, "ResourceError", base.ptr());
  py::register_exception<DegenerateGrowth>(m, "DegenerateGrowth", base.ptr());
  py::register_exception<PrecisionError>(m, "PrecisionError", base.ptr());
  py::register_exception<ConstructionIncomplete>(m, "ConstructionIncomplete", base.ptr());

  py::class_<Presentation>(m, "Presentation")
      .def_static("parse", &Presentation::parse, py::arg("text"))
      .def_static("from_file", &Presentation::from_file, py::arg("path"))
      .def_static("integers", &presentations::integers)
      .def_static("free_group", &presentations::free_group, py::arg("rank"))
      .def_static("surface_group", &presentations::surface_group, py::arg("genus"))
      .def_property_readonly("generators", &Presentation::names)
      .def("to_text", &Presentation::to_text)
      .def("__repr__", [](const Presentation& p) { return "<Presentation " + p.to_text() + ">"; });

  py::class_<GroupOracle>(m, "GroupOracle")
      .def(py::init([](const Presentation& p) { return std::make_unique<GroupOracle>(p); }), py::arg("presentation"))
      .def_property_readonly("presentation", &GroupOracle::presentation, py::return_value_policy::reference_internal)
      .def(
          "normal_form",
          [](const GroupOracle& o, const std::string& w) {
            const Presentation& p = o.presentation();
            return p.format_word(o.normal_form(p.parse_word(w)));
          },
          py::arg("word"))
      .def("sphere_sizes", [](const GroupOracle& o, int radius) { return o.build_ball(radius).sphere_sizes(); },
           py::arg("radius"))
      .def("estimate_delta", &GroupOracle::estimate_delta, py::arg("radius") = 4);

  py::class_<ShortlexFsa>(m, "ShortlexFsa")
      .def_static("build", [](const GroupOracle& o, int radius) { return build_shortlex_fsa(o, 0, radius); },
                  py::arg("oracle"), py::arg("radius") = 6)
      .def_static("parse", &ShortlexFsa::parse, py::arg("text"), py::arg("presentation"))
      .def_property_readonly("num_states", &ShortlexFsa::num_states)
      .def("to_text", &ShortlexFsa::to_text, py::arg("presentation"))
      .def("sphere_counts", &sphere_counts, py::arg("max_n"))
      .def(
          "validate",
          [](const ShortlexFsa& f, const GroupOracle& o, int radius) {
            const FsaValidationReport r = validate_fsa(f, o, radius);
            std::vector<std::string> v;
            for (const auto& x : r.violations) v.push_back(x.detail);
            return v;
          },
          py::arg("oracle"), py::arg("radius"))
      .def("__eq__", [](const ShortlexFsa& a, const ShortlexFsa& b) { return a == b; });

  m.def("analyze_growth", [](const ShortlexFsa& f) { return growth_dict(analyze_growth(f)); }, py::arg("fsa"));
  m.def(
      "incommensurable",
      [](const ShortlexFsa& f, int q) { return check_incommensurable(analyze_growth(f), q).incommensurable; },
      py::arg("fsa"), py::arg("q"));
  m.def(
      "balanced_sequence",
      [](const ShortlexFsa& f, int q, double A, double nu0, std::size_t length) {
        const BalancedSequence s = balanced_sequence(analyze_growth(f).lambda, q, Real(A), Real(nu0), length);
        std::vector<double> nu;
        for (const auto& x : s.nu) nu.push_back(static_cast<double>(x));
        return py::make_tuple(nu, s.delta);
      },
      py::arg("fsa"), py::arg("q"), py::arg("A"), py::arg("nu0"), py::arg("length"));

  m.def(
      "generate_patch",
      [](const GroupOracle& o, const ShortlexFsa& f, int radius, int basepoint_length, int delta, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        return write_patch(generate_shelling_patch(o, f, radius, basepoint_length, delta, rng), o.presentation());
      },
      py::arg("oracle"), py::arg("fsa"), py::arg("radius"), py::arg("basepoint_length"), py::arg("delta"),
      py::arg("seed") = 1);
  m.def(
      "check_patch",
      [](const GroupOracle& o, const ShortlexFsa& f, const std::string& text, int rho) {
        const ShellingPatch p = read_patch(text, o);
        std::vector<Violation> v = check_preshelling(p, o.presentation());
        const auto local = check_shortlex_local_rules(p, f, dictionary_for(o, f, p.delta, rho));
        v.insert(v.end(), local.begin(), local.end());
        return violations(v);
      },
      py::arg("oracle"), py::arg("fsa"), py::arg("patch"), py::arg("rho") = 2);

  m.def(
      "populate",
      [](const GroupOracle& o, const ShortlexFsa& f, int radius, int basepoint_length, int q, int delta,
         std::uint64_t seed) {
        const PopulatedPatch pp =
            build_populated_patch(o, f, analyze_growth(f), radius, basepoint_length, q, Real(-1), seed, delta);
        return write_populated_patch(pp, o.presentation());
      },
      py::arg("oracle"), py::arg("fsa"), py::arg("radius"), py::arg("basepoint_length"), py::arg("q") = 2,
      py::arg("delta") = 2, py::arg("seed") = 1);
  m.def(
      "verify",
      [](const GroupOracle& o, const ShortlexFsa& f, const std::string& text, int rho) {
        PopulatedPatch pp = read_populated_patch(text, o);
        attach_population_context(pp, analyze_growth(f));
        const RuleDictionary dict = dictionary_for(o, f, pp.base.delta, rho);
        return violations(check_populated_rules(pp, o.presentation(), &f, &dict));
      },
      py::arg("oracle"), py::arg("fsa"), py::arg("patch"), py::arg("rho") = 2);

  m.def(
      "torsion_coloring",
      [](const GroupOracle& o, int N, int radius) {
        const TorsionColoring tc = torsion_coloring(o, N, radius);
        return py::make_tuple(tc.num_colors, coloring_conflicts(o, tc), tc.color);
      },
      py::arg("oracle"), py::arg("N"), py::arg("radius"));
}
