#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hfbdyn/bench/commands.hpp"
#include "hfbdyn/bench/selftest.hpp"
#include "hfbdyn/diagnostics.hpp"
#include "hfbdyn/fock.hpp"
#include "hfbdyn/hfb.hpp"
#include "hfbdyn/ti_torus.hpp"

namespace py = pybind11;
using namespace hfbdyn;

namespace {

std::vector<OperatorSymbol> symbols(const std::vector<std::pair<std::string, int>>& ops) {
  std::vector<OperatorSymbol> out;
  for (const auto& [f, i] : ops) {
    if (f == "c" || f == "+") out.push_back(cre(i));
    else if (f == "a" || f == "-") out.push_back(ann(i));
    else throw ConfigError("operator flavor must be 'c' or 'a'");
  }
  return out;
}

py::dict report_dict(const SemiclassicalReport& r) {
  py::dict d;
  d["t"] = r.t;
  d["s1"] = r.s1;
  d["s2"] = r.s2;
  d["s3"] = r.s3;
  d["alpha_hs"] = r.alpha_hs;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "HFB dynamics on a momentum torus with an exact Fock-space oracle";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<GuardError>(m, "GuardError", PyExc_MemoryError);

  py::class_<Lattice>(m, "Lattice")
      .def(py::init([](int dimension, int cutoff, int spin_count, std::vector<int> particle_counts,
                       std::optional<double> epsilon) {
             return Lattice(LatticeSpec{dimension, cutoff, spin_count, std::move(particle_counts), epsilon});
           }),
           py::arg("dimension"), py::arg("cutoff"), py::arg("spin_count"), py::arg("particle_counts"),
           py::arg("epsilon") = py::none())
      .def_property_readonly("size", &Lattice::size)
      .def_property_readonly("dimension", &Lattice::dimension)
      .def_property_readonly("cutoff", &Lattice::cutoff)
      .def_property_readonly("spins", &Lattice::spins)
      .def_property_readonly("particles", &Lattice::particles)
      .def_property_readonly("epsilon", &Lattice::epsilon)
      .def("momentum", [](const Lattice& l, int i) { return l.momentum(i); })
      .def("spin", &Lattice::spin);

  py::class_<PotentialSpec>(m, "Potential")
      .def("__call__", [](const PotentialSpec& V, const IntVec& p) { return V(p); })
      .def_property_readonly("coupling", &PotentialSpec::coupling)
      .def_property_readonly("table", &PotentialSpec::table);
  m.def(
      "potential",
      [](const std::string& kind, double strength, double width, const Lattice& lat) {
        return named_potential(parse_potential_kind(kind), {strength, width}, lat);
      },
      py::arg("kind"), py::arg("strength"), py::arg("width"), py::arg("lattice"));
  m.def("zero_potential", &zero_potential);

  py::class_<GeneralizedDensityMatrix>(m, "State")
      .def(py::init([](MatC omega, MatC alpha) {
             GeneralizedDensityMatrix g{std::move(omega), std::move(alpha)};
             check_dimensions(g);
             return g;
           }),
           py::arg("omega"), py::arg("alpha"))
      .def_readwrite("omega", &GeneralizedDensityMatrix::omega)
      .def_readwrite("alpha", &GeneralizedDensityMatrix::alpha)
      .def_property_readonly("size", &GeneralizedDensityMatrix::size)
      .def("purity_residual", [](const GeneralizedDensityMatrix& g) { return purity_residual(g); })
      .def("to_json", [](const GeneralizedDensityMatrix& g) { return bench::state_to_json(g).dump(); })
      .def_static("from_json",
                  [](const std::string& s) { return bench::state_from_json(nlohmann::json::parse(s)); });

  m.def(
      "random_state",
      [](int modes, std::uint64_t seed, int fills) { return state_of(random_bogoliubov(modes, seed, {2, fills})); },
      py::arg("modes"), py::arg("seed"), py::arg("fills") = 0);
  m.def("ffg_state", [](const Lattice& l) { return assemble(ffg_symbol(l), l); });
  m.def("fermi_sea_state", [](const Lattice& l) { return assemble(fermi_sea_symbol(l), l); });
  m.def("lambda_state", [](const Lattice& l, const std::vector<double>& p) { return lambda_state(l, p).state; });
  m.def("smooth_step_profile", &smooth_step_profile, py::arg("lattice"), py::arg("pairs"), py::arg("width"));
  m.def("admissible_counts", &admissible_counts);

  m.def(
      "hfb_energy", [](const GeneralizedDensityMatrix& g, const PotentialSpec& V, const Lattice& l) {
        return hfb_energy(g, V, l);
      });
  m.def(
      "evolve",
      [](const GeneralizedDensityMatrix& g0, const PotentialSpec& V, const Lattice& l, double T, double dt,
         const std::string& variant, const std::string& integrator, int stride) {
        EvolveOptions o;
        o.variant = parse_variant(variant);
        o.integrator = parse_integrator(integrator);
        o.stride = stride;
        Trajectory tr;
        {
          py::gil_scoped_release release;
          tr = evolve(g0, V, l, T, dt, o);
        }
        py::dict d;
        std::vector<double> trace, energy, purity, alpha;
        for (const auto& e : tr.log) {
          trace.push_back(e.trace_omega);
          energy.push_back(e.energy);
          purity.push_back(e.purity_residual);
          alpha.push_back(e.alpha_hs);
        }
        d["t"] = tr.times;
        d["trace_omega"] = trace;
        d["hfb_energy"] = energy;
        d["purity_residual"] = purity;
        d["alpha_hs_norm"] = alpha;
        d["states"] = tr.states;
        d["dt"] = tr.dt;
        return d;
      },
      py::arg("state"), py::arg("potential"), py::arg("lattice"), py::arg("T"), py::arg("dt") = 0.0,
      py::arg("variant") = "HFB", py::arg("integrator") = "midpoint", py::arg("stride") = 1);

  m.def("semiclassical_report", [](const GeneralizedDensityMatrix& g, const Lattice& l, double t) {
    return report_dict(semiclassical_report(g, l, t));
  }, py::arg("state"), py::arg("lattice"), py::arg("t") = 0.0);
  m.def("wick_correlation", [](const GeneralizedDensityMatrix& g, const std::vector<std::pair<std::string, int>>& ops) {
    return wick_correlation(g, symbols(ops));
  });

  m.def(
      "prepare",
      [](const GeneralizedDensityMatrix& g) { return gaussian_prepare(bloch_messiah(g)).amplitudes; },
      "Fock amplitudes of the pure quasi-free state (bit b of the index = mode b occupied)");
  m.def("fock_expectation", [](const VecC& psi, const std::vector<std::pair<std::string, int>>& ops) {
    const int L = static_cast<int>(std::log2(static_cast<double>(psi.size())) + 0.5);
    return expectation(FockVector(fock_space(L), psi), symbols(ops));
  });
  m.def("rdm1", [](const VecC& psi) {
    const int L = static_cast<int>(std::log2(static_cast<double>(psi.size())) + 0.5);
    return rdm1(FockVector(fock_space(L), psi));
  });
  m.def(
      "evolve_exact",
      [](const VecC& psi, const PotentialSpec& V, const Lattice& l, double t) {
        const FockSpace space = fock_space(l.size());
        py::gil_scoped_release release;
        return ExactPropagator::from_model(l, V, space).evolve(FockVector(space, psi), t, l.epsilon()).amplitudes;
      },
      py::arg("psi"), py::arg("potential"), py::arg("lattice"), py::arg("t"));
  m.def("error_kernel", [](const VecC& psi, const GeneralizedDensityMatrix& g, const std::string& signature) {
    const int L = static_cast<int>(std::log2(static_cast<double>(psi.size())) + 0.5);
    const auto r = error_kernel(FockVector(fock_space(L), psi), g, parse_signature(signature));
    py::dict d;
    d["order"] = r.order;
    d["err_hs"] = r.err_hs;
    d["wick_hs"] = r.wick_hs;
    return d;
  });

  m.def("ground_state_scan", [](const Lattice& l, const PotentialSpec& V, int trials, std::uint64_t seed) {
    const auto s = ground_state_scan(l, V, trials, seed);
    py::dict d;
    d["ffg_energy"] = s.ffg_energy;
    d["min_gap"] = s.min_gap;
    d["gaps"] = s.gaps;
    d["zero_gap_non_ffg"] = s.zero_gap_non_ffg;
    return d;
  });
  m.def(
      "pairing_bound_check",
      [](const std::vector<int>& grid, double width) {
        PairingBoundOptions o;
        o.width = width;
        py::list rows;
        for (const auto& r : pairing_bound_check(grid, o)) {
          py::dict d;
          d["N"] = r.particles;
          d["energy_gap"] = r.energy_gap;
          d["alpha_hs_sq_ratio"] = r.alpha_hs_sq_ratio;
          d["grad_alpha_ratio"] = r.grad_alpha_ratio;
          d["s1_ratio"] = r.s1_ratio;
          rows.append(d);
        }
        return rows;
      },
      py::arg("grid"), py::arg("width") = 1.0);

  m.def(
      "selftest",
      [](std::uint64_t seed) {
        py::dict out;
        for (const auto& r : bench::run_selftest({seed, false})) out[py::str(r.name)] = r.passed;
        return out;
      },
      py::arg("seed") = 1);
  m.def(
      "run",
      [](const std::string& command, const std::string& config_json, const std::string& out,
         const std::vector<std::string>& overrides) {
        const auto cfg = bench::config_from_text(config_json, overrides);
        const bench::RunOptions ro{out, 1};
        if (command == "evolve") return bench::cmd_evolve(cfg, ro).summary;
        if (command == "compare") return bench::cmd_compare(cfg, ro).summary;
        if (command == "appendix-a") return bench::cmd_appendix_a(cfg, ro).summary;
        throw ConfigError("unknown command '" + command + "'");
      },
      py::arg("command"), py::arg("config_json"), py::arg("out"), py::arg("overrides") = std::vector<std::string>{});
  m.attr("__version__") = bench::code_version();
}
