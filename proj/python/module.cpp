#include "kgsys/classify.hpp"
#include "kgsys/groundstate.hpp"
#include "kgsys/lorentz.hpp"
#include "kgsys/propagator.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>

namespace py = pybind11;
using namespace kgsys;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

ScalarField to_field(const SpectralGrid& g, const Array& a) {
    if (static_cast<std::size_t>(a.size()) != g.size())
        throw std::invalid_argument("array has " + std::to_string(a.size()) + " values, grid expects " +
                                    std::to_string(g.size()));
    return ScalarField(g, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const ScalarField& f) {
    const auto& g = f.grid();
    std::vector<py::ssize_t> shape(g.dim(), g.points());
    Array out(shape);
    std::copy(f.values().begin(), f.values().end(), out.mutable_data());
    return out;
}

PhasePoint to_phase(const SpectralGrid& g, const Array& u1, const Array& u2, const std::optional<Array>& v1,
                    const std::optional<Array>& v2) {
    return {{to_field(g, u1), to_field(g, u2)}, v1 ? to_field(g, *v1) : ScalarField(g),
            v2 ? to_field(g, *v2) : ScalarField(g)};
}

py::dict report_dict(const FunctionalReport& r) {
    py::dict d;
    d["E"] = r.E;
    d["J"] = r.J;
    d["K0"] = r.K0;
    d["K2"] = r.K2;
    d["G0"] = r.G0;
    d["G2"] = r.G2;
    d["P"] = r.P;
    d["H1sq"] = r.h1_norm_sq;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Coupled cubic Klein-Gordon system: spectral grids, functionals, ground states, evolution";

    py::class_<SpectralGrid>(m, "Grid")
        .def(py::init<int, int, double>(), py::arg("dim"), py::arg("points"), py::arg("half_length"))
        .def_property_readonly("dim", &SpectralGrid::dim)
        .def_property_readonly("points", &SpectralGrid::points)
        .def_property_readonly("half_length", &SpectralGrid::half_length)
        .def_property_readonly("spacing", &SpectralGrid::spacing)
        .def("coordinates", [](const SpectralGrid& g) {
            py::array_t<double> x(g.points());
            for (int i = 0; i < g.points(); ++i) x.mutable_at(i) = g.coordinate(i);
            return x;
        })
        .def("__repr__", [](const SpectralGrid& g) {
            return "Grid(dim=" + std::to_string(g.dim()) + ", points=" + std::to_string(g.points()) +
                   ", half_length=" + std::to_string(g.half_length()) + ")";
        });

    py::class_<NonlinearityParams>(m, "Params")
        .def(py::init([](double beta, double mu1, double mu2) {
                 NonlinearityParams p{beta, mu1, mu2};
                 p.validate();
                 return p;
             }),
             py::arg("beta"), py::arg("mu1") = 1.0, py::arg("mu2") = 1.0)
        .def_readonly("beta", &NonlinearityParams::beta)
        .def_readonly("mu1", &NonlinearityParams::mu1)
        .def_readonly("mu2", &NonlinearityParams::mu2);

    m.def("functionals",
          [](const SpectralGrid& g, const Array& u1, const Array& u2, const NonlinearityParams& p,
             std::optional<Array> v1, std::optional<Array> v2) {
              return report_dict(functional_report(to_phase(g, u1, u2, v1, v2), p));
          },
          py::arg("grid"), py::arg("u1"), py::arg("u2"), py::arg("params"), py::arg("v1") = py::none(),
          py::arg("v2") = py::none(), "E, J, K0, K2, G0, G2, P and ||u||^2_{H1xH1} of a phase point");

    m.def("h0", &h0, py::arg("params"), py::arg("dim") = 3, "Ground-state level");
    m.def("candidate_levels", [](const NonlinearityParams& p, int dim) {
        const auto c = candidate_levels(p, dim);
        py::dict d;
        d["semitrivial"] = c.semitrivial;
        d["synchronized"] = c.synchronized ? py::cast(*c.synchronized) : py::none();
        d["best"] = c.best();
        return d;
    }, py::arg("params"), py::arg("dim") = 3);

    m.def("ground_state", [](const NonlinearityParams& p, const SpectralGrid& g) {
        const auto gs = solve_ground_state(p, g);
        py::dict d;
        d["level"] = gs.level;
        d["kind"] = to_string(gs.kind);
        d["residual"] = gs.el_residual;
        d["converged"] = gs.converged;
        d["u1"] = to_array(gs.pair.u1);
        d["u2"] = to_array(gs.pair.u2);
        return d;
    }, py::arg("params"), py::arg("grid"), "Constrained minimizer (Q1, Q2) on a grid");

    m.def("classify",
          [](const SpectralGrid& g, const Array& u1, const Array& u2, const NonlinearityParams& p, double level,
             std::optional<Array> v1, std::optional<Array> v2) {
              const auto v = classify(to_phase(g, u1, u2, v1, v2), p, level);
              py::dict d;
              d["region"] = to_string(v.region);
              d["E"] = v.E;
              d["K0"] = v.K0;
              d["margin"] = v.margin;
              d["borderline"] = v.borderline;
              return d;
          },
          py::arg("grid"), py::arg("u1"), py::arg("u2"), py::arg("params"), py::arg("h0"), py::arg("v1") = py::none(),
          py::arg("v2") = py::none());

    m.def("evolve",
          [](const SpectralGrid& g, const Array& u1, const Array& u2, const NonlinearityParams& p, double T,
             double dt, std::optional<Array> v1, std::optional<Array> v2) {
              StepPolicy policy;
              policy.dt_base = dt;
              policy.dt_min = std::min(policy.dt_min, dt / 10);
              Trajectory tr(g, p);
              {
                  py::gil_scoped_release release;
                  tr = evolve(to_phase(g, u1, u2, v1, v2), T, policy, p);
              }
              std::vector<double> E;
              for (const auto& r : tr.series) E.push_back(r.E);
              const auto& fin = tr.final_state();
              py::dict d;
              d["status"] = to_string(tr.status);
              d["stop_time"] = tr.stop_time;
              d["times"] = tr.times;
              d["energy"] = E;
              d["phase_norm"] = tr.phase_norm;
              d["strichartz"] = tr.strichartz_running;
              d["max_energy_drift"] = tr.max_energy_drift;
              d["u1"] = to_array(fin.pair.u1);
              d["u2"] = to_array(fin.pair.u2);
              d["v1"] = to_array(fin.v1);
              d["v2"] = to_array(fin.v2);
              return d;
          },
          py::arg("grid"), py::arg("u1"), py::arg("u2"), py::arg("params"), py::arg("T"), py::arg("dt") = 1e-2,
          py::arg("v1") = py::none(), py::arg("v2") = py::none(), "Split-step evolution to time T");

    m.def("free_evolve",
          [](const SpectralGrid& g, const Array& u1, const Array& u2, double t, std::optional<Array> v1,
             std::optional<Array> v2) {
              const auto s = free_evolve(to_phase(g, u1, u2, v1, v2), t);
              return py::make_tuple(to_array(s.pair.u1), to_array(s.pair.u2), to_array(s.v1), to_array(s.v2));
          },
          py::arg("grid"), py::arg("u1"), py::arg("u2"), py::arg("t"), py::arg("v1") = py::none(),
          py::arg("v2") = py::none());

    m.def("boost_rotation",
          [](const SpectralGrid& g, const Array& u1, const Array& u2, const NonlinearityParams& p,
             const std::vector<double>& lambdas, double duration, double stride, double target,
             std::optional<Array> v1, std::optional<Array> v2) {
              RotationReport rep;
              {
                  py::gil_scoped_release release;
                  const auto blk = SpacetimeBlock::record(to_phase(g, u1, u2, v1, v2), p, duration, stride);
                  rep = energy_momentum_rotation_check(blk, 1, lambdas, target);
              }
              py::list rows;
              for (const auto& r : rep.rows) {
                  py::dict d;
                  d["lambda"] = r.lambda;
                  d["E"] = r.E_boosted;
                  d["P"] = r.P_boosted;
                  d["E_predicted"] = r.E_predicted;
                  d["P_predicted"] = r.P_predicted;
                  d["rel_err"] = r.rel_err;
                  rows.append(d);
              }
              return rows;
          },
          py::arg("grid"), py::arg("u1"), py::arg("u2"), py::arg("params"), py::arg("lambdas"),
          py::arg("duration") = 21.0, py::arg("stride") = 0.05, py::arg("target") = 10.0, py::arg("v1") = py::none(),
          py::arg("v2") = py::none(), "Energy and momentum of boosted solutions along axis 1");
}
