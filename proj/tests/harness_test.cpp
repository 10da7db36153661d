#include "xrsim/harness/config.hpp"
#include "xrsim/harness/csv.hpp"
#include "xrsim/harness/experiment.hpp"
#include "xrsim/harness/kpi.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace xrsim;

TEST(Csv, QuotingAndNumbers)
{
    EXPECT_EQ(CsvField("plain"), "plain");
    EXPECT_EQ(CsvField("a,b"), "\"a,b\"");
    EXPECT_EQ(CsvField("say \"hi\""), "\"say \"\"hi\"\"\"");
    EXPECT_EQ(CsvField("x\ny"), "\"x\ny\"");
    EXPECT_EQ(FormatNumber(0.1), "0.1");
    EXPECT_EQ(FormatNumber(1.0), "1");
    EXPECT_EQ(FormatNumber(std::int64_t{-3}), "-3");
    CsvTable t({"a", "b"});
    t.AddRow({"1", "x,y"});
    EXPECT_EQ(t.Text(), "a,b\r\n1,\"x,y\"\r\n");
    EXPECT_THROW(t.AddRow({"1"}), std::invalid_argument);
    EXPECT_THROW(CsvTable({}), std::invalid_argument);
}

TEST(Csv, GzipRoundTripIsReproducible)
{
    std::string text;
    for (int i = 0; i < 5000; ++i) {
        text += std::to_string(i * 7919 % 1000) + ",row\r\n";
    }
    auto a = GzipCompress(text);
    auto b = GzipCompress(text);
    EXPECT_EQ(a, b);
    EXPECT_LT(a.size(), text.size());
    EXPECT_EQ(static_cast<unsigned char>(a[0]), 0x1f);
    EXPECT_EQ(static_cast<unsigned char>(a[1]), 0x8b);
    EXPECT_EQ(GzipDecompress(a), text);
    EXPECT_EQ(GzipDecompress(GzipCompress("")), "");
    EXPECT_THROW(GzipDecompress("not gzip"), std::runtime_error);
}

TEST(Kpi, SatisfactionBoundaryIsStrict)
{
    EXPECT_EQ(UeSatisfied(100, 99), false);
    EXPECT_EQ(UeSatisfied(1000, 991), true);
    EXPECT_EQ(UeSatisfied(0, 0), std::nullopt);
    EXPECT_THROW(UeSatisfied(10, 11), std::invalid_argument);
    std::vector<UeFlows> ues{{{{100, 100}, {100, 99}}}, {{{100, 100}, {0, 0}}}, {{{0, 0}}}};
    auto c = CountSatisfied(ues);
    EXPECT_EQ(c.satisfied, 1u);
    EXPECT_EQ(c.counted, 2u);
    EXPECT_EQ(c.excluded, 1u);
    EXPECT_DOUBLE_EQ(c.Ratio(), 0.5);
}

TEST(Kpi, CapacityBoundaryIsInclusive)
{
    EXPECT_EQ(XrCapacity({{1, 1.0}, {2, 0.9}, {3, 0.85}}), 2);
    EXPECT_EQ(XrCapacity({{1, 0.5}}), 0);
    EXPECT_EQ(XrCapacity({}), 0);
}

TEST(Kpi, CdfAndGain)
{
    auto c = Cdf({3.0, 1.0, 1.0, 2.0});
    ASSERT_EQ(c.size(), 3u);
    EXPECT_DOUBLE_EQ(c[0].value, 1.0);
    EXPECT_DOUBLE_EQ(c[0].fraction, 0.5);
    EXPECT_DOUBLE_EQ(c[2].fraction, 1.0);
    EXPECT_EQ(EmitCdf({}), "value,fraction\r\n");
    EXPECT_EQ(EmitCdf({2.5}), "value,fraction\r\n2.5,1\r\n");
    std::vector<double> tech{0.5, 1.0}, on{1.0, 1.0};
    EXPECT_DOUBLE_EQ(PooledPowerSavingGain(tech, on), 25.0);
    EXPECT_THROW(PooledPowerSavingGain(tech, std::vector<double>{1.0}), std::invalid_argument);
}

TEST(Config, ParsesSectionsAndLists)
{
    std::istringstream in(R"(
[scenario]
cells = 1
ues_per_cell = 2-6
seeds = 1,3-4
duration_s = 2.5
[dl_video]
rate_mbps = 45
psdb_ms = 15
[scheduler]
kind = pduset
[drx]
mode = fixed
cycle_ms = 50/3
on_ms = 10
[bsr]
table = refined
[empty]
)");
    auto cfg = ParseConfig(in);
    EXPECT_EQ(cfg.network.deployment.cells, 1);
    EXPECT_EQ(cfg.loadMin, 2);
    EXPECT_EQ(cfg.loadMax, 6);
    EXPECT_EQ(cfg.seeds, (std::vector<std::uint64_t>{1, 3, 4}));
    EXPECT_EQ(cfg.network.duration, 2500000);
    EXPECT_DOUBLE_EQ(cfg.network.dlStream.avgRateBps, 45e6);
    EXPECT_EQ(cfg.network.dlStream.psdb, Ms(15));
    EXPECT_EQ(cfg.network.scheduler.kind, SchedulerKind::PduSetAware);
    EXPECT_EQ(cfg.network.drxMode, DrxMode2::Fixed);
    EXPECT_EQ(cfg.network.drx.cycleMs, Rational(50, 3));
    EXPECT_EQ(cfg.network.bsrMode, BsTableKind::RefinedLong);
}

TEST(Config, RejectsBadInput)
{
    ExperimentConfig cfg;
    EXPECT_THROW(ApplyConfigValue(cfg, "scenario.nope", "1"), std::invalid_argument);
    EXPECT_THROW(ApplyConfigValue(cfg, "scenario.cells", "two"), std::invalid_argument);
    EXPECT_THROW(ApplyConfigValue(cfg, "scheduler.kind", "rr"), std::invalid_argument);
    EXPECT_THROW(ApplyConfigValue(cfg, "scenario.seeds", "5-1"), std::invalid_argument);
    try {
        ApplyConfigValue(cfg, "dsr.enabled", "maybe");
        FAIL();
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("dsr.enabled"), std::string::npos);
    }
    std::istringstream top("cells = 1\n");
    EXPECT_THROW(ParseConfig(top), std::invalid_argument);
    std::istringstream broken("[scenario\n");
    EXPECT_THROW(ParseConfig(broken), std::invalid_argument);
    std::istringstream range("[scenario]\nues_per_cell = 0\n");
    EXPECT_THROW(ParseConfig(range), std::invalid_argument);
    EXPECT_THROW(LoadConfig("/nonexistent/x.ini"), std::invalid_argument);
}

TEST(Experiment, WritesTheOutputSet)
{
    ExperimentConfig cfg;
    cfg.seeds = {1, 2};
    cfg.loadMin = 1;
    cfg.loadMax = 2;
    cfg.network.warmup = Ms(200);
    cfg.network.duration = Ms(500);
    cfg.network.logEvents = true;
    cfg.l4s = true;
    cfg.l4sLoop.duration = Ms(500);
    cfg.jobs = 2;
    auto out = RunExperiment(cfg);
    for (const char* f : {"kpi.csv", "cdf_padding_bytes.csv", "cdf_throughput_mbps.csv", "cdf_rb_utilization.csv",
                          "events.csv.gz", "l4s.csv"}) {
        EXPECT_TRUE(out.files.count(f)) << f;
    }
    const auto& kpi = out.files.at("kpi.csv");
    EXPECT_EQ(kpi.rfind("ues_per_cell,metric,pooled,seed_1,seed_2\r\n", 0), 0u);
    EXPECT_NE(kpi.find("all,xr_capacity,2,2,2"), std::string::npos);
    EXPECT_EQ(GzipDecompress(out.files.at("events.csv.gz")).rfind("seed,ues_per_cell,time_us,ue,event,detail", 0), 0u);
    EXPECT_EQ(out.report.loads.size(), 2u);

    cfg.jobs = 1;
    EXPECT_EQ(RunExperiment(cfg).files, out.files);
}
