#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cpm/bench.hpp"
#include "cpm/compose.hpp"
#include "cpm/ipfp.hpp"
#include "cpm/model_io.hpp"
#include "cpm/sequence.hpp"

namespace py = pybind11;
using namespace cpm;

namespace {

Scope to_scope(const std::vector<VarId>& vars) { return Scope::from_unsorted(vars); }

py::array_t<double> values_array(const Factor& f) {
  std::vector<py::ssize_t> shape(f.cards().begin(), f.cards().end());
  py::array_t<double> out(shape);
  std::copy(f.values().begin(), f.values().end(), out.mutable_data());
  return out;
}

Factor factor_from(const std::vector<VarId>& vars, py::array_t<double, py::array::c_style |
                                                                          py::array::forcecast> values,
                   const VariableRegistry& reg, double norm_tol) {
  // Values are laid out in the order `vars` is given; permute to canonical.
  const Scope scope = to_scope(vars);
  std::vector<std::size_t> given_cards;
  for (VarId v : vars) given_cards.push_back(reg.cardinality(v));
  const std::size_t volume = checked_volume(given_cards);
  if (static_cast<std::size_t>(values.size()) != volume) {
    throw Error(ErrorKind::ShapeMismatch, "expected " + std::to_string(volume) + " values, got " +
                                              std::to_string(values.size()));
  }
  std::vector<double> out(volume);
  const double* src = values.data();
  std::vector<std::size_t> cfg(vars.size(), 0);
  std::vector<std::size_t> canon(vars.size());
  const auto cards = cards_of(scope, reg);
  for (std::size_t i = 0; i < volume; ++i) {
    for (std::size_t d = 0; d < vars.size(); ++d) canon[*scope.position(vars[d])] = cfg[d];
    std::size_t idx = 0;
    for (std::size_t d = 0; d < canon.size(); ++d) idx = idx * cards[d] + canon[d];
    out[idx] = src[i];
    for (std::size_t d = vars.size(); d-- > 0;) {
      if (++cfg[d] < given_cards[d]) break;
      cfg[d] = 0;
    }
  }
  Tolerance tol;
  tol.norm_tol = norm_tol;
  return make_factor(scope, std::move(out), reg, tol);
}

VarId resolve(const GeneratingSequence& seq, const py::object& var) {
  if (py::isinstance<py::str>(var)) return seq.registry().id(var.cast<std::string>());
  return var.cast<VarId>();
}

PerfectMethod method_of(const std::string& s) {
  if (s == "definition" || s == "def") return PerfectMethod::Definition;
  if (s == "marginals") return PerfectMethod::Marginals;
  if (s == "both") return PerfectMethod::Both;
  throw Error(ErrorKind::InvalidArgument, "unknown method '" + s + "'");
}

AuxChoice aux_of(const std::string& s) {
  if (s == "own") return AuxChoice::OwnMarginal;
  if (s == "uniform") return AuxChoice::Uniform;
  throw Error(ErrorKind::InvalidArgument, "unknown auxiliary choice '" + s + "'");
}

FixtureStructure structure_of(const std::string& s) {
  if (s == "independent") return FixtureStructure::Independent;
  if (s == "chain") return FixtureStructure::Chain;
  if (s == "random") return FixtureStructure::Random;
  throw Error(ErrorKind::InvalidArgument, "unknown structure '" + s + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Composition of low-dimensional discrete distributions";

  static py::exception<Error> error(m, "CpmError");
  static py::exception<ParseError> parse_error(m, "ParseError", error.ptr());
  static py::exception<DominanceError> dominance_error(m, "DominanceError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    auto raise = [](py::handle type, const Error& e, py::dict extra) {
      py::object exc = type(e.what());
      exc.attr("kind") = std::string(to_string(e.kind()));
      for (auto item : extra) exc.attr(item.first) = item.second;
      PyErr_SetObject(type.ptr(), exc.ptr());
    };
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ParseError& e) {
      py::dict extra;
      extra["line"] = e.line();
      extra["column"] = e.column();
      raise(parse_error, e, extra);
    } catch (const DominanceError& e) {
      py::dict extra;
      extra["step"] = e.step() ? py::cast(*e.step()) : py::none();
      extra["witness"] = e.witness();
      raise(dominance_error, e, extra);
    } catch (const Error& e) {
      raise(error, e, py::dict());
    }
  });

  py::class_<VariableRegistry>(m, "Registry")
      .def(py::init<>())
      .def("add", &VariableRegistry::add, py::arg("name"), py::arg("cardinality"))
      .def("id", &VariableRegistry::id)
      .def("name", &VariableRegistry::name)
      .def("cardinality", &VariableRegistry::cardinality)
      .def("__len__", &VariableRegistry::size)
      .def("__eq__", [](const VariableRegistry& a, const VariableRegistry& b) { return a == b; });

  py::class_<Factor>(m, "Factor")
      .def(py::init(&factor_from), py::arg("vars"), py::arg("values"), py::arg("registry"),
           py::arg("norm_tol") = 1e-9,
           "Distribution over `vars`; `values` use the given variable order, last fastest.")
      .def_property_readonly("scope", [](const Factor& f) { return f.scope().vars(); })
      .def_property_readonly("cards", [](const Factor& f) {
        return std::vector<std::size_t>(f.cards().begin(), f.cards().end());
      })
      .def_property_readonly("values", &values_array)
      .def("sum", &Factor::sum)
      .def("__len__", &Factor::size)
      .def("__eq__", [](const Factor& a, const Factor& b) { return a == b; });

  py::class_<GeneratingSequence>(m, "Sequence")
      .def(py::init<VariableRegistry>(), py::arg("registry"))
      .def("add", &GeneratingSequence::add, py::arg("factor"), py::arg("name") = "")
      .def_property_readonly("registry", &GeneratingSequence::registry)
      .def_property_readonly("names", &GeneratingSequence::names)
      .def_property_readonly("factors", &GeneratingSequence::factors)
      .def_property_readonly("union_scope",
                             [](const GeneratingSequence& s) { return s.union_scope().vars(); })
      .def("__len__", &GeneratingSequence::size)
      .def("__getitem__", [](const GeneratingSequence& s, std::size_t k) {
        if (k >= s.size()) throw py::index_error();
        return s[k];
      });

  m.def("compose_right", [](const Factor& a, const Factor& b) { return compose_right(a, b); });
  m.def("compose_left", [](const Factor& a, const Factor& b) { return compose_left(a, b); });
  m.def(
      "anticipate",
      [](const Factor& p2, const Factor& p3, const std::vector<VarId>& context,
         const std::string& aux) { return anticipate(p2, p3, to_scope(context), aux_of(aux)); },
      py::arg("p2"), py::arg("p3"), py::arg("context"), py::arg("aux") = "own");
  m.def("marginal", [](const Factor& f, const std::vector<VarId>& keep) {
    return marginal(f, to_scope(keep));
  });
  m.def("marginalize_out", &marginalize_out);
  m.def("max_abs_diff", [](const Factor& a, const Factor& b) { return max_abs_diff(a, b); });
  m.def(
      "is_consistent",
      [](const Factor& a, const Factor& b, double tol) {
        Tolerance t;
        t.eq_tol = tol;
        return is_consistent(a, b, t);
      },
      py::arg("p1"), py::arg("p2"), py::arg("tol") = 1e-9);

  m.def("compose_sequence_right", &compose_sequence_right, py::arg("seq"),
        py::arg("max_entries") = kDefaultMaxEntries);
  m.def("compose_sequence_left", &compose_sequence_left, py::arg("seq"),
        py::arg("max_entries") = kDefaultMaxEntries);
  m.def("oracle_joint", py::overload_cast<const GeneratingSequence&, std::size_t>(&oracle_joint),
        py::arg("seq"), py::arg("max_entries") = kDefaultMaxEntries);

  m.def(
      "is_perfect",
      [](const GeneratingSequence& seq, const std::string& method, double tol) {
        Tolerance t;
        t.eq_tol = tol;
        const auto r = is_perfect(seq, method_of(method), t);
        py::dict out;
        out["verdict"] = r.verdict;
        out["worst_deviation"] = r.worst_deviation;
        out["failing_index"] = r.failing_index ? py::cast(*r.failing_index) : py::none();
        return out;
      },
      py::arg("seq"), py::arg("method") = "both", py::arg("tol") = 1e-9);

  py::class_<EliminationStats>(m, "EliminationStats")
      .def_readonly("peak_entries", &EliminationStats::peak_entries)
      .def_readonly("touched", &EliminationStats::touched)
      .def_readonly("fill_in", &EliminationStats::fill_in)
      .def_readonly("rounds", &EliminationStats::rounds);
  py::class_<EliminationResult>(m, "EliminationResult")
      .def_readonly("reduced", &EliminationResult::reduced)
      .def_readonly("residual", &EliminationResult::residual)
      .def_readonly("stats", &EliminationResult::stats);

  m.def(
      "eliminate_variable",
      [](const GeneratingSequence& seq, const py::object& var, bool keep_residual) {
        return eliminate_variable(seq, resolve(seq, var), keep_residual);
      },
      py::arg("seq"), py::arg("var"), py::arg("keep_residual") = false,
      "Local elimination; `var` is a name or an id.");
  m.def(
      "eliminate_variables",
      [](const GeneratingSequence& seq, const std::vector<py::object>& vars, bool ignore_missing) {
        std::vector<VarId> ids;
        for (const auto& v : vars) ids.push_back(resolve(seq, v));
        return eliminate_variables(seq, ids, ignore_missing);
      },
      py::arg("seq"), py::arg("vars"), py::arg("ignore_missing") = false);

  py::class_<IpfpRun>(m, "IpfpRun")
      .def_readonly("result", &IpfpRun::result)
      .def_readonly("first_cycle", &IpfpRun::first_cycle)
      .def_readonly("cycles_used", &IpfpRun::cycles_used)
      .def_readonly("per_cycle_change", &IpfpRun::per_cycle_change)
      .def_readonly("converged", &IpfpRun::converged)
      .def_readonly("max_marginal_mismatch", &IpfpRun::max_marginal_mismatch);
  m.def(
      "ipfp_run",
      [](const GeneratingSequence& seq, std::size_t max_cycles, double tol) {
        IpfpOptions o;
        o.max_cycles = max_cycles;
        o.tol = tol;
        return ipfp_run(seq, o);
      },
      py::arg("seq"), py::arg("max_cycles") = 500, py::arg("tol") = 1e-9);

  m.def(
      "parse_model",
      [](const std::string& text, bool renormalize) {
        ParseOptions o;
        o.renormalize = renormalize;
        return parse_model(text, o);
      },
      py::arg("text"), py::arg("renormalize") = false);
  m.def(
      "read_model",
      [](const std::string& path, bool renormalize) {
        ParseOptions o;
        o.renormalize = renormalize;
        return read_model_file(path, o);
      },
      py::arg("path"), py::arg("renormalize") = false);
  m.def("serialize_model", &serialize_model);

  auto fixture = [](std::uint64_t seed, std::size_t num_vars, std::size_t max_card,
                    const std::string& structure) {
    FixtureOptions o;
    o.seed = seed;
    o.num_vars = num_vars;
    o.max_card = max_card;
    o.structure = structure_of(structure);
    return o;
  };
  m.def(
      "gen_perfect_fixture",
      [fixture](std::uint64_t seed, std::size_t n, std::size_t c, const std::string& s) {
        return gen_perfect_fixture(fixture(seed, n, c, s));
      },
      py::arg("seed") = 1, py::arg("num_vars") = 4, py::arg("max_card") = 3,
      py::arg("structure") = "random");
  m.def(
      "gen_nonperfect_fixture",
      [fixture](std::uint64_t seed, std::size_t n, std::size_t c, const std::string& s,
                double magnitude) {
        return gen_nonperfect_fixture(fixture(seed, n, c, s), magnitude);
      },
      py::arg("seed") = 1, py::arg("num_vars") = 4, py::arg("max_card") = 3,
      py::arg("structure") = "random", py::arg("magnitude") = 0.5);
  m.def("make_binary_chain", &make_binary_chain, py::arg("num_vars"), py::arg("seed") = 7);
}
