#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "vne/darboux_engine.hpp"
#include "vne/errors.hpp"
#include "vne/lax_engine.hpp"
#include "vne/scenario.hpp"
#include "vne/seed_factory.hpp"
#include "vne/symmetry_transforms.hpp"
#include "vne/verification.hpp"

namespace py = pybind11;
using namespace vne;

namespace {

using SeedPtr = std::shared_ptr<SeedSolution>;
using LaxPtr = std::shared_ptr<LaxSolution>;

py::dict dressed_state_dict(const DressedState& s) {
    py::dict d;
    d["rho1"] = s.rho1;
    d["P"] = s.P;
    d["T"] = s.T;
    d["form_gap"] = s.form_gap;
    d["bridge_gap"] = s.bridge_gap;
    return d;
}

py::list report_list(const VerificationReport& r) {
    py::list out;
    for (const CheckResult& c : r.checks) {
        py::dict d;
        d["name"] = c.name;
        d["pass"] = c.pass;
        d["worst_value"] = c.worst_value;
        d["tolerance"] = c.tolerance;
        d["location"] = c.location;
        d["note"] = c.note;
        out.append(d);
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Darboux dressing of the nonlinear von Neumann equation";

    auto base = py::register_exception<VneError>(m, "VneError");
    py::register_exception<DimensionMismatch>(m, "DimensionMismatch", base.ptr());
    py::register_exception<InvalidInput>(m, "InvalidInput", base.ptr());
    py::register_exception<NumericalOverflow>(m, "NumericalOverflow", base.ptr());
    py::register_exception<DefectiveEigenpair>(m, "DefectiveEigenpair", base.ptr());
    py::register_exception<SingularDarboux>(m, "SingularDarboux", base.ptr());
    py::register_exception<InconsistentLax>(m, "InconsistentLax", base.ptr());
    py::register_exception<UnsupportedScenario>(m, "UnsupportedScenario", base.ptr());
    py::register_exception<SchemaError>(m, "SchemaError", base.ptr());

    m.def("mat_exp", &mat_exp, py::arg("m"));
    m.def("commutator", &commutator);
    m.def(
        "eig_hermitian",
        [](const OperatorMatrix& a) {
            const HermitianEigen e = eig_hermitian(a);
            return py::make_tuple(e.values, e.vectors);
        },
        py::arg("m"));
    m.def(
        "eig_pair",
        [](const OperatorMatrix& a, std::optional<Complex> pin) {
            const EigenPair p = eig_pair_general(a, pin);
            return py::make_tuple(p.z, p.v);
        },
        py::arg("m"), py::arg("pin") = py::none());
    m.def("hamiltonian", [](int n, const OperatorMatrix& a, const OperatorMatrix& rho) {
        return hamiltonian_of(ModelSpec(n, a), rho);
    });
    m.def("rhs", [](int n, const OperatorMatrix& a, const OperatorMatrix& rho) { return rhs(ModelSpec(n, a), rho); });
    m.def(
        "residual",
        [](const SeedPtr& seed, const std::function<OperatorMatrix(double)>& rho_at, double t) {
            return residual(seed->spec, rho_at, t).residual_norm;
        },
        py::arg("seed"), py::arg("rho_at"), py::arg("t"));

    py::class_<SeedSolution, SeedPtr>(m, "Seed")
        .def_property_readonly("family", [](const SeedSolution& s) { return to_string(s.family); })
        .def_property_readonly("n", [](const SeedSolution& s) { return s.spec.order(); })
        .def_property_readonly("A", [](const SeedSolution& s) { return s.spec.A(); })
        .def_readonly("rho0", &SeedSolution::rho0)
        .def_readonly("a", &SeedSolution::a)
        .def_readonly("frame", &SeedSolution::frame)
        .def("evolve", &SeedSolution::evolve, py::arg("t"))
        .def("shift", [](const SeedSolution& s, double lambda) { return std::make_shared<SeedSolution>(shift_seed(s, lambda)); })
        .def("rescale", [](const SeedSolution& s, double y) { return std::make_shared<SeedSolution>(rescale_seed(s, y)); });

    m.def(
        "anticommuting_seed",
        [](int n, const std::vector<double>& alphas, const std::vector<double>& couplings) {
            return std::make_shared<SeedSolution>(make_anticommuting_seed(n, alphas, couplings));
        },
        py::arg("n"), py::arg("alphas"), py::arg("couplings"));
    m.def(
        "delta_seed",
        [](const std::vector<std::pair<double, double>>& blocks, double a) {
            std::vector<DeltaBlock> b;
            for (const auto& [omega, kappa] : blocks) b.push_back({omega, kappa});
            return std::make_shared<SeedSolution>(make_delta_commuting_seed(b, a));
        },
        py::arg("blocks"), py::arg("a"));
    m.def(
        "pure_state_seed",
        [](int n, const OperatorMatrix& a, const StateVector& psi) {
            return std::make_shared<SeedSolution>(make_pure_state_seed(ModelSpec(n, a), psi));
        },
        py::arg("n"), py::arg("A"), py::arg("psi"));
    m.def(
        "commuting_seed",
        [](int n, const OperatorMatrix& a, const OperatorMatrix& rho) {
            return std::make_shared<SeedSolution>(make_commuting_seed(ModelSpec(n, a), rho));
        },
        py::arg("n"), py::arg("A"), py::arg("rho"));

    py::class_<LaxSolution, LaxPtr>(m, "LaxSolution")
        .def_property_readonly("mu", [](const LaxSolution& l) { return l.params().mu; })
        .def_property_readonly("nu", [](const LaxSolution& l) { return l.params().nu; })
        .def_property_readonly("z_mu", [](const LaxSolution& l) { return l.params().z_mu; })
        .def_property_readonly("z_nu", [](const LaxSolution& l) { return l.params().z_nu; })
        .def_property_readonly("hermitian_mode", [](const LaxSolution& l) { return l.params().hermitian_mode; })
        .def_property_readonly("seed", [](const LaxSolution& l) { return std::const_pointer_cast<SeedSolution>(l.seed_ptr()); })
        .def("phi", &LaxSolution::phi_at, py::arg("t"))
        .def("chi", &LaxSolution::chi_at, py::arg("t"))
        .def("psi", &LaxSolution::psi_at, py::arg("t"))
        .def("phi_eigen_residual", &LaxSolution::phi_eigen_residual, py::arg("t"))
        .def(
            "dressed",
            [](const LaxPtr& l, double t) {
                const DressedSample s = dressed_sample(*l, t);
                return dressed_state_dict(s.state);
            },
            py::arg("t"))
        .def(
            "covariance_residual",
            [](const LaxSolution& l, double t) {
                const CovarianceResidual c = covariance_residual(l, t);
                return py::make_tuple(c.eigen, c.time);
            },
            py::arg("t"));

    m.def(
        "solve_lax",
        [](const SeedPtr& seed, Complex mu, std::optional<Complex> nu, std::optional<Complex> lam) {
            LaxRequest req;
            req.mu = mu;
            req.nu = nu;
            req.lambda = lam;
            return std::make_shared<LaxSolution>(LaxSolution::solve(seed, req));
        },
        py::arg("seed"), py::arg("mu"), py::arg("nu") = py::none(), py::arg("lam") = py::none());

    m.def("projector", [](const StateVector& phi, const StateVector& chi) { return projector(phi, chi); });
    m.def(
        "dress",
        [](const OperatorMatrix& rho, const OperatorMatrix& a, const OperatorMatrix& p, Complex mu, Complex nu) {
            return dressed_state_dict(dress(rho, a, p, mu, nu));
        },
        py::arg("rho"), py::arg("A"), py::arg("P"), py::arg("mu"), py::arg("nu"));

    m.def(
        "dressed_trajectory",
        [](const LaxPtr& lax, const std::vector<double>& times, std::optional<double> shift_lambda,
           std::optional<double> rescale_y) {
            const Trajectory tr = dressed_trajectory(lax, times);
            SuiteOptions opts;
            opts.shift_lambda = shift_lambda;
            opts.rescale_y = rescale_y;
            const VerificationReport r = run_suite(tr, opts);
            py::dict d;
            d["times"] = tr.times;
            d["states"] = tr.states;
            d["singular_time"] = tr.singular_time;
            d["checks"] = report_list(r);
            d["overall"] = r.overall;
            return d;
        },
        py::arg("lax"), py::arg("times"), py::arg("shift_lambda") = py::none(),
        py::arg("rescale_y") = py::none());

    m.def(
        "run_scenario",
        [](const std::string& config_json, double tol_scale) {
            const ScenarioResult r = run_scenario(parse_config(config_json), tol_scale);
            py::dict d;
            d["exit_code"] = r.exit_code;
            d["message"] = r.message;
            d["times"] = r.trajectory.times;
            d["states"] = r.trajectory.states;
            d["report_json"] = report_to_json(r);
            d["lock_json"] = lock_to_json(r);
            return d;
        },
        py::arg("config_json"), py::arg("tol_scale") = 1.0);
}
