#include "ddlure/scenarios.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "ddlure/errors.hpp"

namespace ddlure {

namespace {

Mat rows2(std::initializer_list<std::initializer_list<double>> rows) {
  Mat m(rows.size(), rows.begin()->size());
  Index i = 0;
  for (const auto& r : rows) {
    Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

Mat col(std::initializer_list<double> v) {
  Mat m(v.size(), 1);
  Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

InputLaw sin_input() {
  return [](double t, const Vec&) { return Vec::Constant(1, std::sin(t)); };
}

// Samples of the example plant on linspace(0, 1, T); X1 is rebuilt with
// `record_L` when given.
DataSet sample_example(const PlantModel& plant, std::size_t T,
                       const OdeOptions& ode, const Mat* record_L) {
  ContinuousOptions opts;
  opts.ode = ode;
  opts.output_times = linspace(0.0, 1.0, T);
  const Trajectory tr =
      simulate_continuous(plant, example_x0(), sin_input(), 0.0, 1.0, opts);
  DataSet d = collect_dataset_at(tr, opts.output_times);
  if (record_L) {
    d.X1 = plant.A() * d.X0 + plant.B() * d.U0 + *record_L * d.F0;
  }
  return d;
}

}  // namespace

PlantModel example_plant(const Mat& L) {
  return PlantModel(rows2({{9.0 / 8.0, -1.0}, {0.0, 0.0}}), col({0.0, 1.0}), L,
                    rows2({{1.0, 0.0}}), NonlinearitySpec{"surge_phi", {}},
                    TimeDomain::kContinuous);
}

PlantModel example1_plant(double alpha) {
  return example_plant(alpha * col({-1.0, -1.2}));
}

PlantModel example2_plant() { return example_plant(col({-1.0, 0.0})); }

Vec example_x0() { return Vec{{2.0, -1.0}}; }

DataSet example1_dataset() {
  const Mat rec = col({-2.0, -2.4});
  return sample_example(example1_plant(1.0), 5, OdeOptions::coarse(), &rec);
}

DataSet example1_dataset_alpha2() {
  return sample_example(example1_plant(2.0), 5, OdeOptions::precise(), nullptr);
}

DataSet example2_dataset() {
  return sample_example(example2_plant(), 10, OdeOptions::precise(), nullptr);
}

DataSet example2_reference_dataset() {
  const Mat rec = col({-2.0, 0.0});
  return sample_example(example1_plant(1.0), 10, OdeOptions::coarse(), &rec);
}

QuadConstraint example_passive_constraint() {
  return build_passive(rows2({{1.0, 0.0}}));
}

namespace reference {

Mat ex1_U0() { return rows2({{0, 0.2474, 0.4794, 0.6816, 0.8415}}); }

Mat ex1_X0() {
  return rows2({{2, 1.269, 1.3208, 1.5113, 1.7451},
                {-1, -2.993, -4.3724, -6.0225, -8.2189}});
}

Mat ex1_X1() {
  return rows2({{-21.25, -5.309, -4.6511, -5.9817, -8.1951},
                {-29.4, -11.428, -12.1319, -15.7636, -21.2112}});
}

Mat ex1_F0() { return rows2({{12.25, 4.8648, 5.2547, 6.8522, 9.1886}}); }

DataSet ex1_dataset() {
  DataSet d;
  d.U0 = ex1_U0();
  d.X0 = ex1_X0();
  d.X1 = ex1_X1();
  d.F0 = ex1_F0();
  d.time_domain = TimeDomain::kContinuous;
  d.sample_times = linspace(0.0, 1.0, 5);
  return d;
}

Mat ex1_Y() {
  return rows2({{1.2922, 1.6018},
                {-0.1923, 1.0528},
                {0.5113, -0.5863},
                {0.5192, -1.1827},
                {-1.0316, 0.2419}});
}

Mat ex1_K() { return rows2({{4.3339, -3.7435}}); }

Mat ex1_lyap() {
  return rows2({{-23.6176, -30.3340}, {-30.3340, -39.1227}});
}

Mat ex2_Y1() {
  return rows2({{0.9823, -3.5073},
                {-2.0064, 8.5180},
                {-1.3370, 7.1478},
                {0.41465, 3.1658},
                {2.2302, -0.2915},
                {3.5496, -3.1425},
                {3.7054, -4.8273},
                {2.2325, -4.4031},
                {-0.7529, -1.5849},
                {-6.3569, 3.4286}});
}

Mat ex2_Y2() {
  return col({-5.6005, 12.8729, 10.2375, 2.6801, -4.4256, -10.2866, -12.6223,
              -9.1124, -0.4900, 16.4407});
}

Mat ex2_K() { return rows2({{7.0779, -3.9230}}); }
Mat ex2_M() { return rows2({{-3.5130}}); }
Mat ex2_P() { return rows2({{4.1628, -2.0853}, {-2.0853, 1.1872}}); }
Mat ex2_lyap() { return rows2({{-2.5259, -2.6865}, {-2.6865, -5.2943}}); }

Mat ex3_K() { return rows2({{35.8066, -2.1645}}); }
Mat ex3_P() { return rows2({{0.5217, -0.0181}, {-0.0181, 0.015}}); }

}  // namespace reference

double peak_gain(const Mat& A, const Mat& L, const Mat& H) {
  using C = std::complex<double>;
  const Index n = A.rows();
  const Eigen::MatrixXcd a = A.cast<C>();
  const Eigen::MatrixXcd l = L.cast<C>();
  const Eigen::MatrixXcd h = H.cast<C>();
  double peak = 0.0;
  for (int k = 0; k < 720; ++k) {
    const C z = std::polar(1.0, 2.0 * std::numbers::pi * k / 720.0);
    const Eigen::MatrixXcd g =
        h * (z * Eigen::MatrixXcd::Identity(n, n) - a).partialPivLu().solve(l);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(g);
    peak = std::max(peak, svd.singularValues()(0));
  }
  return peak;
}

namespace {

SuiteInstance finish_instance(std::uint64_t seed, std::mt19937_64& rng,
                              Index n, Index m, Index q, bool duplicate_input) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  auto gauss = [&](Index r, Index c) {
    return Mat(Mat::NullaryExpr(r, c, [&] { return normal(rng); }));
  };

  for (int attempt = 0; attempt < 20; ++attempt) {
    Mat acl0 = gauss(n, n);
    const double sr = spectral_radius(acl0);
    if (!(sr > 1e-6)) continue;
    acl0 *= 0.5 / sr;
    Mat B = gauss(n, m);
    Mat k0 = 0.5 * gauss(m, n);
    if (duplicate_input) {
      // u = [w; w]: only the column sum of B is excited.
      k0.row(1) = k0.row(0);
    }
    const Mat A = acl0 - B * k0;
    const Mat L = gauss(n, q);
    const Mat H = gauss(q, n);
    const double peak = peak_gain(acl0, L, H);
    if (!(peak > 1e-6)) continue;
    const double gamma = 0.5 / peak;

    const int family = static_cast<int>(seed % 3);
    NonlinearitySpec spec;
    QuadConstraint c;
    Method method;
    std::string fam;
    if (family == 0) {
      spec = {"sin", {gamma}};
      c = build_lipschitz(gamma, q, q).with_H(H);
      method = Method::kDtQpsd;
      fam = "lipschitz";
    } else if (family == 1) {
      spec = {"sector_mid", {0.0, gamma}};
      c = build_sector(Mat::Zero(q, q), gamma * Mat::Identity(q, q)).with_H(H);
      method = Method::kDtQzero;
      fam = "sector";
    } else {
      const double a = 0.2 * gamma;
      spec = {"sector_mid", {a, gamma}};
      c = build_sector(a * Mat::Identity(q, q), gamma * Mat::Identity(q, q))
              .with_H(H);
      method = Method::kDtQnsd;
      fam = "sector-nsd";
    }
    PlantModel model(A, B, L, H, spec, TimeDomain::kDiscrete);

    const Index T = n + m + 4;
    Vec x0(n);
    for (Index i = 0; i < n; ++i) x0(i) = unif(rng);
    std::vector<Vec> inputs;
    for (Index k = 0; k < T; ++k) {
      Vec u(m);
      for (Index i = 0; i < m; ++i) u(i) = unif(rng);
      if (duplicate_input) u(1) = u(0);
      inputs.push_back(u);
    }
    const Trajectory tr = simulate_discrete(model, x0, inputs);
    std::vector<std::size_t> idx(T);
    for (Index k = 0; k < T; ++k) idx[k] = static_cast<std::size_t>(k);
    DataSet data = collect_dataset(tr, idx);
    const AssumptionReport ar = check_assumptions(data);
    if (!ar.full_X0 || (!duplicate_input && !ar.full_W0)) continue;
    // badly unstable draws make the data span several decades
    if (data.scale() > 100.0) continue;

    LiftedConstraint lc = lift(c, n);
    return SuiteInstance{seed, std::move(model), std::move(c), std::move(lc),
                         std::move(data), method, fam};
  }
  throw Error("could not draw a well-posed random instance");
}

}  // namespace

SuiteInstance make_dt_instance(std::uint64_t seed) {
  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL ^ seed);
  std::uniform_int_distribution<int> pick_n(2, 4), pick_m(1, 2), pick_q(1, 2);
  const Index n = pick_n(rng);
  const Index m = pick_m(rng);
  const Index q = std::min<Index>(pick_q(rng), n);
  return finish_instance(seed, rng, n, m, q, false);
}

SuiteInstance make_duplicated_input_instance(std::uint64_t seed) {
  std::mt19937_64 rng(0x51ed2701ULL ^ seed);
  std::uniform_int_distribution<int> pick_n(2, 4);
  const Index n = pick_n(rng);
  return finish_instance(seed, rng, n, 2, 1, true);
}

}  // namespace ddlure
