#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "c3po/workload.hpp"

namespace c3po {
namespace {

Catalog weighted(std::vector<double> weights) {
  Catalog c;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    ServiceSpec s;
    s.id = static_cast<ServiceId>(j + 1);
    s.popularity_weight = weights[j];
    s.mean_exec_time = 1e-3;
    c.push_back(s);
  }
  return c;
}

TEST(PoissonStream, ZeroRateIsEmpty) { EXPECT_TRUE(poisson_stream(0.0, 10.0, 1).empty()); }

TEST(PoissonStream, CountWithinThreeSigma) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto s = poisson_stream(1000.0, 10.0, seed);
    EXPECT_NEAR(static_cast<double>(s.size()), 10000.0, 300.0) << seed;
  }
}

TEST(PoissonStream, StrictlyIncreasingAndReproducible) {
  const auto a = poisson_stream(5000.0, 3.0, 77);
  const auto b = poisson_stream(5000.0, 3.0, 77);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, poisson_stream(5000.0, 3.0, 78));
  for (std::size_t i = 1; i < a.size(); ++i) ASSERT_LT(a[i - 1], a[i]);
  EXPECT_GE(a.front(), 0.0);
  EXPECT_LT(a.back(), 3.0);
}

TEST(PoissonStream, GapsAreExponential) {
  const auto s = poisson_stream(200.0, 500.0, 3);
  double sum = 0.0, sq = 0.0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    const double g = s[i] - s[i - 1];
    sum += g;
    sq += g * g;
  }
  const double n = static_cast<double>(s.size() - 1);
  const double mean = sum / n;
  // Exponential: sd equals mean.
  EXPECT_NEAR(mean, 1.0 / 200.0, 3.0 * (1.0 / 200.0) / std::sqrt(n));
  EXPECT_NEAR(std::sqrt(sq / n - mean * mean) / mean, 1.0, 0.02);
}

TEST(PoissonStream, Errors) {
  EXPECT_THROW(poisson_stream(-1.0, 1.0, 1), ConfigError);
  EXPECT_THROW(poisson_stream(1.0, 0.0, 1), ConfigError);
}

TEST(SampleService, SingleService) {
  const auto c = weighted({3.0});
  for (double d : {0.0, 0.3, 0.999999}) EXPECT_EQ(sample_service(c, d), 1);
}

TEST(SampleService, CdfThresholds) {
  const auto c = weighted({0.25, 0.75});
  EXPECT_EQ(sample_service(c, 0.1), 1);
  EXPECT_EQ(sample_service(c, 0.5), 2);
  EXPECT_EQ(sample_service(c, 0.25), 2);
}

TEST(SampleService, EmptyOrWeightlessCatalog) {
  EXPECT_THROW(sample_service(Catalog{}, 0.5), DomainError);
  EXPECT_THROW(sample_service(weighted({0.0, 0.0}), 0.5), DomainError);
}

TEST(SampleService, BinomialFrequency) {
  const auto c = weighted({0.2, 0.8});
  const ServiceSampler sampler(c);
  RandomStream rng(11, Substream::ServiceChoice);
  const int n = 1000000;
  int first = 0;
  for (int i = 0; i < n; ++i) first += sampler.sample(rng.uniform()) == 1;
  EXPECT_NEAR(static_cast<double>(first) / n, 0.2, 3.0 * std::sqrt(0.2 * 0.8 / n));
}

TEST(SampleService, ChiSquareOnZipfCatalog) {
  CatalogSpec spec;
  spec.services = 10;
  spec.zipf_exponent = 0.8;
  const auto c = make_catalog(spec, 1);
  const auto p = normalized_popularity(c);
  const ServiceSampler sampler(c);
  RandomStream rng(12, Substream::ServiceChoice);
  const int n = 1000000;
  std::vector<double> counts(c.size(), 0.0);
  for (int i = 0; i < n; ++i) counts[sampler.index_of_draw(rng.uniform())] += 1.0;
  double chi2 = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) {
    const double e = p[j] * n;
    chi2 += (counts[j] - e) * (counts[j] - e) / e;
  }
  // Upper 0.001 quantile of chi-square with 9 degrees of freedom.
  EXPECT_LT(chi2, 27.877);
}

TEST(ExponentialExecTime, Inversion) {
  EXPECT_NEAR(exponential_exec_time(1.0, std::exp(-1.0)), 1.0, 1e-12);
  EXPECT_NEAR(exponential_exec_time(2.0, std::exp(-3.0)), 6.0, 1e-12);
}

TEST(ExponentialExecTime, SampleMean) {
  RandomStream rng(5, Substream::ExecTime);
  double sum = 0.0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    const double x = exponential_exec_time(0.5, rng.open_uniform());
    ASSERT_GT(x, 0.0);
    sum += x;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.005);
}

const std::vector<JitterSpec> kTwoBursts{{0.040, 0.010, 6.0}, {0.070, 0.010, 6.0}};

TEST(WithJitters, NoJittersIsPlainPoisson) {
  EXPECT_EQ(with_jitters(1000.0, {}, 2.0, 9), poisson_stream(1000.0, 2.0, 9));
}

TEST(WithJitters, WindowRatesConverge) {
  // Counts pooled over seeds: 400 runs x 10 ms x 6000/s = 24000 expected per window.
  const int runs = 400;
  double in_first = 0, in_second = 0, quiet = 0;
  for (int s = 0; s < runs; ++s) {
    const auto t = with_jitters(1000.0, kTwoBursts, 0.15, static_cast<std::uint64_t>(s));
    for (std::size_t i = 1; i < t.size(); ++i) ASSERT_LT(t[i - 1], t[i]);
    for (double x : t) {
      if (x >= 0.040 && x < 0.050) ++in_first;
      else if (x >= 0.070 && x < 0.080) ++in_second;
      else if (x >= 0.100) ++quiet;
    }
  }
  auto within = [](double count, double expected) {
    return std::abs(count - expected) <= 3.0 * std::sqrt(expected);
  };
  EXPECT_TRUE(within(in_first, runs * 60.0)) << in_first;
  EXPECT_TRUE(within(in_second, runs * 60.0)) << in_second;
  EXPECT_TRUE(within(quiet, runs * 50.0)) << quiet;
}

TEST(WithJitters, ZeroMultiplierSilencesWindow) {
  const std::vector<JitterSpec> j{{0.2, 0.3, 0.0}};
  const auto t = with_jitters(2000.0, j, 1.0, 4);
  EXPECT_GT(t.size(), 1000u);
  for (double x : t) EXPECT_FALSE(x >= 0.2 && x < 0.5) << x;
}

TEST(WithJitters, Reproducible) {
  EXPECT_EQ(with_jitters(1000.0, kTwoBursts, 0.15, 8), with_jitters(1000.0, kTwoBursts, 0.15, 8));
}

TEST(WithJitters, InvalidWindows) {
  const std::vector<JitterSpec> overlap{{0.04, 0.02, 6.0}, {0.05, 0.01, 6.0}};
  EXPECT_THROW(with_jitters(1000.0, overlap, 0.15, 1), ConfigError);
  const std::vector<JitterSpec> outside{{0.14, 0.02, 6.0}};
  EXPECT_THROW(with_jitters(1000.0, outside, 0.15, 1), ConfigError);
  const std::vector<JitterSpec> empty{{0.04, 0.0, 6.0}};
  EXPECT_THROW(with_jitters(1000.0, empty, 0.15, 1), ConfigError);
  const std::vector<JitterSpec> negative{{0.04, 0.01, -1.0}};
  EXPECT_THROW(with_jitters(1000.0, negative, 0.15, 1), ConfigError);
}

TEST(MakeCatalog, ZipfDefaults) {
  const auto c = make_catalog(CatalogSpec{}, 1);
  ASSERT_EQ(c.size(), 100u);
  EXPECT_GT(c[0].popularity_weight, c[1].popularity_weight);
  EXPECT_DOUBLE_EQ(c[9].popularity_weight, 1.0 / std::pow(10.0, 0.8));
}

TEST(MakeCatalog, ExecTimesDrawnOncePerSeed) {
  CatalogSpec spec;
  spec.exec_time_min = 1e-3;
  spec.exec_time_max = 9e-3;
  const auto a = make_catalog(spec, 3);
  const auto b = make_catalog(spec, 3);
  for (std::size_t j = 0; j < a.size(); ++j) {
    EXPECT_EQ(a[j].mean_exec_time, b[j].mean_exec_time);
    EXPECT_GE(a[j].mean_exec_time, 1e-3);
    EXPECT_LE(a[j].mean_exec_time, 9e-3);
  }
  spec.exec_time_max = 0.5e-3;
  EXPECT_THROW(make_catalog(spec, 3), ConfigError);
}

TEST(GenerateRequests, UniqueIdsAndOrderedPerClient) {
  const auto c = make_catalog(CatalogSpec{}, 2);
  const std::vector<ClientLoad> clients{{10, 500.0}, {11, 1500.0}, {12, 0.0}};
  const auto reqs = generate_requests(clients, kTwoBursts, 0.15, c, 42);
  std::set<std::uint64_t> ids;
  std::map<NodeId, double> last;
  std::map<NodeId, int> per_client;
  for (const auto& r : reqs) {
    EXPECT_TRUE(ids.insert(r.request_id).second);
    EXPECT_GE(r.emit_time, last[r.client]);
    last[r.client] = r.emit_time;
    ++per_client[r.client];
    EXPECT_GT(r.exec_time, 0.0);
  }
  EXPECT_EQ(per_client.count(12), 0u);
  EXPECT_GT(per_client[11], per_client[10]);
  const auto again = generate_requests(clients, kTwoBursts, 0.15, c, 42);
  ASSERT_EQ(again.size(), reqs.size());
  for (std::size_t i = 0; i < reqs.size(); ++i) {
    EXPECT_EQ(again[i].emit_time, reqs[i].emit_time);
    EXPECT_EQ(again[i].service, reqs[i].service);
    EXPECT_EQ(again[i].exec_time, reqs[i].exec_time);
  }
}

TEST(RandomStreams, SubstreamsAreIndependentAndReproducible) {
  RandomStream a(1, Substream::Arrivals), b(1, Substream::Arrivals), c(1, Substream::ExecTime);
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    EXPECT_NE(x, c.uniform());
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
  }
  EXPECT_NE(derive_seed(1, Substream::ControllerDraw, 0), derive_seed(1, Substream::ControllerDraw, 1));
}

}  // namespace
}  // namespace c3po
