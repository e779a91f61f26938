#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

#include "clwe/harness.hpp"
#include "clwe/verify.hpp"

namespace py = pybind11;
using namespace clwe;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::memcpy(out.mutable_data(), v.data(), v.size() * sizeof(double));
  return out;
}

std::vector<double> to_vector(py::array_t<double, py::array::c_style | py::array::forcecast> a) {
  return {a.data(), a.data() + a.size()};
}

py::dict dataset_to_dict(const Dataset& ds) {
  py::array_t<double> xs({static_cast<py::ssize_t>(ds.size()), static_cast<py::ssize_t>(ds.n)});
  std::memcpy(xs.mutable_data(), ds.xs.data(), ds.xs.size() * sizeof(double));
  py::array_t<std::int8_t> labels(static_cast<py::ssize_t>(ds.size()));
  std::memcpy(labels.mutable_data(), ds.labels.data(), ds.labels.size());
  py::dict out;
  out["x"] = std::move(xs);
  out["y"] = std::move(labels);
  out["manifest"] = py::module_::import("json").attr("loads")(ds.manifest.to_json());
  return out;
}

MixtureParams mixture_from(int n, double gamma, double beta, double out_beta, double alpha,
                           std::uint64_t seed) {
  RandomStream rng(splitmix64(seed ^ 0x77655F646972ULL));
  if (gamma == 0.0) gamma = 2.0 * std::sqrt(static_cast<double>(n));
  if (beta == 0.0) beta = 1.0 / static_cast<double>(n);
  if (out_beta == 0.0) out_beta = 2.0 * beta;
  auto base = CLWEParams::sample(n, rng, gamma, beta);
  return MixtureParams::make(std::move(base),
                             out_beta,
                             alpha == 0.0 ? std::optional<double>{} : std::optional<double>{alpha});
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "CLWE pancake-mixture hard instances: samplers, planted oracle, verification";

  // gaussian primitives
  m.def(
      "rho",
      [](double s, py::array_t<double, py::array::c_style | py::array::forcecast> x) {
        const auto v = to_vector(x);
        return rho(Width(s), v);
      },
      py::arg("s"), py::arg("x"), "Gaussian mass function exp(-pi ||x/s||^2)");
  m.def("theta_mass", [](double s) { return theta_mass(Width(s)); }, py::arg("s"),
        "rho_s(Z), certified truncated theta sum");
  m.def("poisson_residual", [](double s) { return poisson_residual(Width(s)); }, py::arg("s"));
  m.def("width_to_sigma", [](double s) { return Width(s).sigma(); }, py::arg("s"));
  m.def("sigma_to_width", [](double sigma) { return Width::from_sigma(sigma).s; }, py::arg("sigma"));
  m.def(
      "discrete_gaussian_tail",
      [](double s, int d) { return discrete_gaussian_two_sided_tail(Width(s), d); }, py::arg("s"),
      py::arg("d"), "P(|U| >= d) for U ~ D_{Z,s}");
  m.def(
      "discrete_gaussian_sample",
      [](double s, std::size_t count, std::uint64_t seed) {
        const DiscreteGaussian dg((Width(s)));
        RandomStream rng(seed);
        py::array_t<long> out(static_cast<py::ssize_t>(count));
        auto* ptr = out.mutable_data();
        for (std::size_t i = 0; i < count; ++i) ptr[i] = dg.sample(rng);
        return out;
      },
      py::arg("s"), py::arg("count"), py::arg("seed"));

  // dataset generation
  m.def(
      "sample_mixture",
      [](int n, std::uint64_t m, std::uint64_t seed, double gamma, double beta, double out_beta,
         double alpha, int threads) {
        const auto params = mixture_from(n, gamma, beta, out_beta, alpha, seed);
        auto out = dataset_to_dict(generate_mixture(params, m, seed, threads));
        out["w"] = to_array(params.plus.base.w);
        return out;
      },
      py::arg("n"), py::arg("m"), py::arg("seed"), py::arg("gamma") = 0.0, py::arg("beta") = 0.0,
      py::arg("out_beta") = 0.0, py::arg("alpha") = 0.0, py::arg("threads") = 1,
      "Labeled pancake mixture 1/2 (D_+, +1) + 1/2 (D_-, -1); returns x, y, manifest, w");
  m.def(
      "sample_null",
      [](int n, std::uint64_t m, std::uint64_t seed, int threads) {
        return dataset_to_dict(generate_null(n, m, seed, threads));
      },
      py::arg("n"), py::arg("m"), py::arg("seed"), py::arg("threads") = 1,
      "N(0, I/(2 pi)) x Be(1/2)");
  m.def(
      "write_dataset",
      [](py::dict ds, const std::filesystem::path& path) {
        Dataset native;
        auto xs = ds["x"].cast<py::array_t<double, py::array::c_style | py::array::forcecast>>();
        auto ys = ds["y"].cast<py::array_t<std::int8_t, py::array::c_style | py::array::forcecast>>();
        native.n = static_cast<int>(xs.shape(1));
        native.xs.assign(xs.data(), xs.data() + xs.size());
        native.labels.assign(ys.data(), ys.data() + ys.size());
        native.manifest = DatasetManifest::from_json(
            py::module_::import("json").attr("dumps")(ds["manifest"]).cast<std::string>());
        write_dataset(native, path);
      },
      py::arg("dataset"), py::arg("path"));
  m.def(
      "read_dataset",
      [](const std::filesystem::path& path) { return dataset_to_dict(read_dataset(path)); },
      py::arg("path"));
  m.def(
      "read_manifest",
      [](const std::filesystem::path& path) {
        return py::module_::import("json").attr("loads")(read_manifest(path).to_json());
      },
      py::arg("path"));

  // densities
  m.def(
      "clwe_density",
      [](int n, double gamma, double beta, py::array_t<double> w, py::array_t<double> y, double z) {
        const auto params = CLWEParams::make(n, gamma, beta, to_vector(w));
        const auto yv = to_vector(y);
        return clwe_density(params, yv, z);
      },
      py::arg("n"), py::arg("gamma"), py::arg("beta"), py::arg("w"), py::arg("y"), py::arg("z"));
  m.def(
      "pancake_density_1d",
      [](double gamma, double out_beta, double c, double alpha, py::array_t<double> ts) {
        const auto base = CLWEParams::make(1, gamma, out_beta / 2.0, {1.0});
        const auto spec = HCLWESpec::make(
            base, c, out_beta, alpha == 0.0 ? std::optional<double>{} : std::optional<double>{alpha});
        const ProjectionDensity density(spec, spec.alpha.has_value());
        const auto tv = to_vector(ts);
        py::array_t<double> out(static_cast<py::ssize_t>(tv.size()));
        auto* ptr = out.mutable_data();
        for (std::size_t i = 0; i < tv.size(); ++i) ptr[i] = density(tv[i]);
        return out;
      },
      py::arg("gamma"), py::arg("out_beta"), py::arg("c") = 0.0, py::arg("alpha") = 0.0,
      py::arg("t") = py::array_t<double>(),
      "Marginal density of <w, x>; truncated variant when alpha > 0");

  // oracle
  py::class_<OraclePTF>(m, "Oracle")
      .def_property_readonly("d", [](const OraclePTF& o) { return o.d; })
      .def_property_readonly("degree", &OraclePTF::degree)
      .def_property_readonly("roots", [](const OraclePTF& o) { return to_array(o.roots); })
      .def_property_readonly("w", [](const OraclePTF& o) { return to_array(o.w); })
      .def("classify",
           [](const OraclePTF& o, py::array_t<double, py::array::c_style | py::array::forcecast> xs) {
             if (xs.ndim() == 1) {
               return py::cast(o.classify({xs.data(), static_cast<std::size_t>(xs.size())}));
             }
             const auto rows = xs.shape(0);
             const auto cols = static_cast<std::size_t>(xs.shape(1));
             py::array_t<int> out(rows);
             auto* ptr = out.mutable_data();
             for (py::ssize_t i = 0; i < rows; ++i) {
               ptr[i] = o.classify({xs.data() + static_cast<std::size_t>(i) * cols, cols});
             }
             return py::cast<py::object>(std::move(out));
           },
           py::arg("x"))
      .def("coefficients", [](const OraclePTF& o) { return to_array(ptf_coefficients(o)); })
      .def("ltf_weights",
           [](const OraclePTF& o, int degree) {
             const auto spec = EmbeddingSpec::make(static_cast<int>(o.w.size()), degree);
             return to_array(ltf_weights(o, spec));
           },
           py::arg("degree"))
      .def("to_json", &OraclePTF::to_json)
      .def_static("from_json", &OraclePTF::from_json);

  m.def(
      "build_oracle",
      [](py::array_t<double> w, double gamma, double out_beta, double alpha, int d) {
        auto wv = to_vector(w);
        if (alpha == 0.0) alpha = HCLWESpec::default_alpha(gamma, out_beta);
        return build_oracle(IntervalFamily::build(gamma, out_beta, alpha), std::move(wv), d);
      },
      py::arg("w"), py::arg("gamma"), py::arg("out_beta"), py::arg("alpha") = 0.0, py::arg("d") = 8);
  m.def(
      "oracle_error_exact",
      [](int n, double gamma, double out_beta, double alpha, int d, std::uint64_t seed) {
        return oracle_error_exact(mixture_from(n, gamma, out_beta / 2.0, out_beta, alpha, seed), d);
      },
      py::arg("n"), py::arg("gamma") = 0.0, py::arg("out_beta") = 0.0, py::arg("alpha") = 0.0,
      py::arg("d") = 8, py::arg("seed") = 1);
  m.def(
      "embed_monomials",
      [](py::array_t<double, py::array::c_style | py::array::forcecast> x, int degree) {
        const auto xv = to_vector(x);
        const auto spec = EmbeddingSpec::make(static_cast<int>(xv.size()), degree);
        return to_array(embed_monomials(spec, xv));
      },
      py::arg("x"), py::arg("degree"), "Graded-lex monomial embedding of a single point");

  // verification
  m.def(
      "verify",
      [](std::vector<int> criteria, std::uint64_t seed, int threads) {
        VerifyConfig cfg;
        cfg.seed = seed;
        cfg.threads = threads;
        const auto report =
            criteria.empty() ? verify_all(cfg) : verify_criteria(criteria, cfg);
        return py::module_::import("json").attr("loads")(report.to_json());
      },
      py::arg("criteria") = std::vector<int>{}, py::arg("seed") = 1, py::arg("threads") = 1,
      "Run verification criteria (1..10; empty = all) and return the report");
  m.attr("criterion_names") = criterion_names();
  m.attr("__version__") = "0.1.0";
}
