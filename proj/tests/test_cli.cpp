#include <gtest/gtest.h>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "planck/planck.hpp"

using namespace planck;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("planck-test-" + name);
  fs::remove_all(p);
  return p;
}

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::string config_error_field(const ExperimentConfig& c) {
  try {
    validate(c);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

ExperimentConfig circle_smallmass(const fs::path& dir) {
  ExperimentConfig c;
  c.kind = "smallmass";
  c.manifold = "circle";
  c.families = {"cos:k=20"};
  c.a = 5;
  c.delta = 0.3;
  c.output_dir = dir.string();
  return c;
}

}  // namespace

TEST(FamilyGrammar, AllFamiliesParseAndRoundTrip) {
  const std::vector<std::pair<std::string, Manifold>> cases{
      {"cos:k=20", Manifold::circle()},
      {"cos:k=3,phase=0.5", Manifold::circle()},
      {"torus:N=25,preset=full", Manifold::torus()},
      {"torus:N=65,preset=pair", Manifold::torus()},
      {"torus:N=25,preset=random,seed=4", Manifold::torus()},
      {"zonal:l=20", Manifold::sphere()},
      {"hw:k=16", Manifold::sphere()},
      {"sphrand:l=7,seed=2", Manifold::sphere()},
  };
  for (const auto& [text, m] : cases) {
    const EigenfunctionSpec u = make_family(text, m);
    EXPECT_EQ(u.descriptor(), text);
    EXPECT_EQ(make_family(u.descriptor(), m).descriptor(), text);
  }
  EXPECT_EQ(make_family(" zonal : l = 20 ", Manifold::sphere()).descriptor(), "zonal:l=20");
}

TEST(FamilyGrammar, ErrorsNameTheFamily) {
  for (const auto& [text, m] : std::vector<std::pair<std::string, Manifold>>{
           {"zonal:l=20", Manifold::torus()},
           {"cos:k=x", Manifold::circle()},
           {"cos:k=0", Manifold::circle()},
           {"bessel:n=2", Manifold::sphere()},
           {"zonal:l=20,foo=1", Manifold::sphere()},
           {"zonal", Manifold::sphere()},
           {"torus:N=3", Manifold::torus()},
           {"torus:N=25,preset=odd", Manifold::torus()}}) {
    try {
      make_family(text, m);
      ADD_FAILURE() << text;
    } catch (const ConfigError& e) {
      EXPECT_NE(e.field().find(text), std::string::npos) << e.what();
    }
  }
}

TEST(Config, IniRoundTrip) {
  ExperimentConfig c;
  c.kind = "sweep";
  c.manifold = "sphere";
  c.families = {"zonal:l=20", "sphrand:l=12,seed=3"};
  c.seed = 17;
  c.a = 7.25;
  c.eps_frac = 0.05;
  c.eps_mass = 0.2;
  c.delta = 0.123456789012345;
  c.delta_list = {0.5, 0.25, 0.1};
  c.center = std::vector<double>{1.0, 2.5};
  c.threshold = "fixed";
  c.c2 = 0.3;
  c.quadrature_radial = 40;
  c.assert_large_ratio = true;
  c.output_dir = "some/dir";
  c.formats = {"json"};
  std::istringstream in(to_ini(c));
  EXPECT_EQ(config_from_ini(in), c);
}

TEST(Config, DefaultsRoundTripAndEpsSetsBoth) {
  const ExperimentConfig d;
  std::istringstream in(to_ini(d));
  EXPECT_EQ(config_from_ini(in), d);
  ExperimentConfig c;
  apply_setting(c, "parameters", "eps", "0.2");
  EXPECT_EQ(c.eps_frac, 0.2);
  EXPECT_EQ(c.eps_mass, 0.2);
}

TEST(Config, UnknownKeysAndSectionsAreErrors) {
  ExperimentConfig c;
  EXPECT_THROW(apply_setting(c, "parameters", "alpha", "1"), ConfigError);
  EXPECT_THROW(apply_setting(c, "misc", "a", "1"), ConfigError);
  try {
    apply_setting(c, "parameters", "delta", "abc");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "parameters.delta");
  }
  std::istringstream bad("[parameters]\ndelta = 0.1\nnot an ini line\n");
  EXPECT_THROW(config_from_ini(bad), ConfigError);
}

TEST(Config, ValidationNamesTheField) {
  const fs::path dir = scratch("validate");
  ExperimentConfig c = circle_smallmass(dir);
  EXPECT_EQ(config_error_field(c), "");
  c.delta = 5.0 / 3.0 + 0.01;
  EXPECT_EQ(config_error_field(c), "parameters.delta");
  c = circle_smallmass(dir);
  c.eps_frac = 1.0;
  EXPECT_EQ(config_error_field(c), "parameters.eps_frac");
  c = circle_smallmass(dir);
  c.kind = "nonsense";
  EXPECT_EQ(config_error_field(c), "experiment.kind");
  c = circle_smallmass(dir);
  c.manifold = "klein";
  EXPECT_EQ(config_error_field(c), "experiment.manifold");
  c = circle_smallmass(dir);
  c.families.clear();
  EXPECT_EQ(config_error_field(c), "experiment.families");
  c = circle_smallmass(dir);
  c.formats = {"xml"};
  EXPECT_EQ(config_error_field(c), "output.formats");
  c = circle_smallmass(dir);
  c.a = 40;
  EXPECT_EQ(config_error_field(c), "parameters.a");
}

TEST(Runner, ConfigErrorExitsWithOne) {
  const fs::path dir = scratch("exit1");
  ExperimentConfig c = circle_smallmass(dir);
  c.delta = 2.0;
  std::ostringstream out, err;
  const RunResult r = run(c, out, err);
  EXPECT_EQ(r.status, kExitConfig);
  EXPECT_NE(err.str().find("parameters.delta"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir));
}

TEST(Runner, FailedCheckExitsWithTwo) {
  const fs::path dir = scratch("exit2");
  ExperimentConfig c;
  c.kind = "largevalue";
  c.manifold = "sphere";
  c.families = {"hw:k=16"};
  c.assert_large_ratio = true;
  c.output_dir = dir.string();
  std::ostringstream out, err;
  EXPECT_EQ(run(c, out, err).status, kExitAssertion);
  EXPECT_NE(out.str().find("[FAIL] large_ratio"), std::string::npos);
}

TEST(Runner, CircleSmallMassArtifacts) {
  const fs::path dir = scratch("circle");
  std::ostringstream out, err;
  const RunResult r = run(circle_smallmass(dir), out, err);
  ASSERT_EQ(r.status, kExitOk) << err.str();
  EXPECT_NE(out.str().find("K/J=1.000"), std::string::npos) << out.str();
  const fs::path csv = dir / "smallmass_0_cos_k_20.csv";
  const fs::path json = dir / "smallmass_0_cos_k_20.json";
  ASSERT_TRUE(fs::exists(csv));
  ASSERT_TRUE(fs::exists(json));

  const std::string text = read(csv);
  EXPECT_EQ(text.find('\r'), std::string::npos);
  const auto ls = lines(text);
  ASSERT_GE(ls.size(), 4u);
  EXPECT_EQ(ls[0].rfind("# planck-lab", 0), 0u);
  std::size_t header = 0;
  while (ls[header].front() == '#') ++header;
  EXPECT_EQ(ls[header], "ball_index,center_0,center_1,R,r,g_j,selected,nodal_found,q_0,q_1,local_mass,rho,classification");
  EXPECT_EQ(ls.size() - header - 1, r.reports.front().packing->J);
  for (std::size_t i = header + 1; i < ls.size(); ++i) {
    std::vector<std::string> cells;
    std::stringstream row(ls[i]);
    for (std::string cell; std::getline(row, cell, ',');) cells.push_back(cell);
    ASSERT_EQ(cells.size(), 13u) << ls[i];
    double rho = 0;
    std::from_chars(cells[11].data(), cells[11].data() + cells[11].size(), rho);
    EXPECT_NEAR(rho, 1 - std::sin(0.6) / 0.6, 1e-8);
    EXPECT_EQ(cells[12], "CaseI_small");
  }

  const Json j = Json::parse(read(json));
  EXPECT_EQ(j["schema_version"], kReportSchemaVersion);
  EXPECT_EQ(j["config"]["experiment"]["families"], "cos:k=20");
}

TEST(Runner, RepeatedRunsAreByteIdentical) {
  const fs::path a = scratch("repeat-a"), b = scratch("repeat-b");
  ExperimentConfig c;
  c.kind = "sweep";
  c.manifold = "sphere";
  c.families = {"zonal:l=20"};
  c.output_dir = a.string();
  std::ostringstream out, err;
  ASSERT_EQ(run(c, out, err).status, kExitOk) << err.str();
  c.output_dir = b.string();
  ASSERT_EQ(run(c, out, err).status, kExitOk);
  for (const auto& e : fs::directory_iterator(a)) {
    const std::string ta = read(e.path()), tb = read(b / e.path().filename());
    // The echoed output directory differs by construction.
    auto strip = [&](std::string s, const fs::path& dir) {
      for (auto p = s.find(dir.string()); p != std::string::npos; p = s.find(dir.string())) s.erase(p, dir.string().size());
      return s;
    };
    EXPECT_EQ(strip(ta, a), strip(tb, b)) << e.path();
  }
}

TEST(Report, JsonRoundTrip) {
  SmallMassOptions o;
  o.a = 8;
  const ExperimentReport r = smallmass_experiment(EigenfunctionSpec::zonal(20), o, 0.3);
  const Json j = to_json(r);
  const ExperimentReport back = report_from_json(j);
  EXPECT_EQ(to_json(back).dump(), j.dump());
  ASSERT_EQ(back.balls.size(), r.balls.size());
  for (std::size_t i = 0; i < r.balls.size(); ++i) {
    EXPECT_EQ(back.balls[i].rho, r.balls[i].rho);
    EXPECT_EQ(back.balls[i].center.coords, r.balls[i].center.coords);
  }
}

TEST(Report, NumbersRoundTripExactly) {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5, 0.0}) {
    const std::string s = format_number(x);
    double y = 0;
    std::from_chars(s.data(), s.data() + s.size(), y);
    EXPECT_EQ(x, y) << s;
  }
}

TEST(Plotdata, RhoVsDeltaSortedAndPositive) {
  SmallMassOptions o;
  o.a = 5;
  const ExperimentReport r = scale_sweep(EigenfunctionSpec::circle_mode(20), o, {0.4, 0.2, 0.1, 0.05});
  const auto ls = lines(emit_plotdata(r, PlotKind::RhoVsDelta));
  ASSERT_EQ(ls.size(), 5u);
  EXPECT_EQ(ls[0], "# delta,rho_max");
  double prev = 0;
  for (std::size_t i = 1; i < ls.size(); ++i) {
    const double d = std::stod(ls[i].substr(0, ls[i].find(','))), v = std::stod(ls[i].substr(ls[i].find(',') + 1));
    EXPECT_GT(d, prev);
    EXPECT_GT(v, 0.0);
    prev = d;
  }
  EXPECT_THROW(emit_plotdata(r, PlotKind::RatioVsK), std::invalid_argument);
}

TEST(Plotdata, HistogramCountsSumToJ) {
  SmallMassOptions o;
  o.a = 5;
  const ExperimentReport r = smallmass_experiment(EigenfunctionSpec::circle_mode(20, 0.3), o, 0.3);
  const auto ls = lines(emit_plotdata(r, PlotKind::RhoHistogram, 7));
  ASSERT_EQ(ls.size(), 8u);
  std::size_t total = 0;
  for (std::size_t i = 1; i < ls.size(); ++i) total += std::stoul(ls[i].substr(ls[i].rfind(',') + 1));
  EXPECT_EQ(total, r.packing->J);
}

TEST(Plotdata, RatioVsK) {
  const ExperimentReport r = highest_weight_example({});
  const auto ls = lines(emit_plotdata(r, PlotKind::RatioVsK));
  EXPECT_EQ(ls.size(), 4u);
  EXPECT_THROW(plot_kind_from_string("scatter"), std::invalid_argument);
}

TEST(Acceptance, SuiteCoversAllManifolds) {
  const auto suite = acceptance_suite(0);
  bool circle = false, torus = false, sphere = false;
  for (const auto& u : suite) {
    circle = circle || u.manifold() == Manifold::circle();
    torus = torus || u.manifold() == Manifold::torus();
    sphere = sphere || u.manifold() == Manifold::sphere();
  }
  EXPECT_TRUE(circle && torus && sphere);
}
