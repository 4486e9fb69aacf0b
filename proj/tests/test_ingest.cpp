#include <gtest/gtest.h>

#include <sstream>

#include "regimecast/ingest.hpp"
#include "regimecast/synth.hpp"

using namespace regimecast;
using namespace regimecast::ingest;

namespace {

const char* kHeader =
    "IncidentPrimaryKey,Jurisdiction,Problem,Priority_Number,Time_PhonePickUp,Time_First_Unit_Assigned,"
    "Time_First_Unit_Enroute,Time_First_Unit_Arrived,Call_Disposition,Longitude,Latitude\n";

IncidentTable parse(const std::string& body) {
  std::istringstream in(std::string(kHeader) + body);
  return parse_incidents(in);
}

IncidentRecord record(std::string problem, std::string disposition) {
  IncidentRecord r;
  r.primary_key = "k";
  r.problem = std::move(problem);
  r.disposition = std::move(disposition);
  return r;
}

Timestamp ts(const char* text) { return *parse_timestamp(text); }

}  // namespace

TEST(ParseIncidents, RefusalChestPainKeptVerbatim) {
  const auto t = parse("1,Austin,Chest Pain,3,2020-03-17 12:00:00,,,,Refusal,-97.7,30.2\n");
  ASSERT_EQ(t.records.size(), 1u);
  EXPECT_EQ(t.records[0].problem, "Chest Pain");
  EXPECT_EQ(t.records[0].disposition, "Refusal");
  EXPECT_EQ(t.records[0].priority, 3);
  EXPECT_EQ(t.report.rows_rejected, 0u);
}

TEST(ParseIncidents, HeaderOnlyGivesEmptyTable) {
  const auto t = parse("");
  EXPECT_TRUE(t.records.empty());
  EXPECT_EQ(t.report.rows_read, 0u);
  EXPECT_EQ(t.report.rows_rejected, 0u);
}

TEST(ParseIncidents, InvertedTimestampFlaggedNotDropped) {
  const auto t = parse(
      "a,X,Fall,2,2020-01-01 10:00:00,2020-01-01 10:01:00,2020-01-01 10:02:00,2020-01-01 10:01:30,Transported,,\n"
      "b,X,Fall,2,2020-01-01 10:00:00,2020-01-01 10:01:00,2020-01-01 10:02:00,2020-01-01 10:09:00,Transported,,\n");
  EXPECT_EQ(t.records.size(), 2u);
  ASSERT_EQ(t.report.flagged_keys.size(), 1u);
  EXPECT_EQ(t.report.flagged_keys[0], "a");
}

TEST(ParseIncidents, HeaderMatchIsCaseInsensitiveAndTrimmed) {
  std::istringstream in(" incidentprimarykey , PROBLEM ,call_disposition\nk1,Fall,Refusal\n");
  const auto t = parse_incidents(in);
  ASSERT_EQ(t.records.size(), 1u);
  EXPECT_EQ(t.records[0].primary_key, "k1");
  EXPECT_FALSE(t.records[0].t_phone_pickup);
}

TEST(ParseIncidents, MissingMandatoryColumnNamesIt) {
  std::istringstream in("IncidentPrimaryKey,Problem\n1,Fall\n");
  try {
    parse_incidents(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::schema);
    EXPECT_NE(std::string(e.what()).find("Call_Disposition"), std::string::npos);
  }
}

TEST(ParseIncidents, DuplicateKeysListed) {
  try {
    parse("7,X,Fall,,,,,,Refusal,,\n7,X,Sick,,,,,,Refusal,,\n8,X,Sick,,,,,,Refusal,,\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::duplicate);
    EXPECT_NE(std::string(e.what()).find(" 7"), std::string::npos);
  }
}

TEST(ParseIncidents, RejectionsAndUnparseableTimestamps) {
  const auto t = parse(
      ",X,Fall,,,,,,Refusal,,\n"
      "2,X,Fall,16,,,,,Refusal,,\n"
      "3,X,Fall,,yesterday,,,,Refusal,,\n"
      "4,X,Fall\n");
  EXPECT_EQ(t.report.rows_read, 4u);
  EXPECT_EQ(t.report.rows_rejected, 3u);
  EXPECT_EQ(t.report.reasons.at("empty_primary_key"), 1u);
  EXPECT_EQ(t.report.reasons.at("priority_out_of_range"), 1u);
  EXPECT_EQ(t.report.reasons.at("column_count"), 1u);
  ASSERT_EQ(t.records.size(), 1u);
  EXPECT_FALSE(t.records[0].t_phone_pickup);
  EXPECT_EQ(t.report.unparseable_timestamps, 1u);
}

TEST(ParseIncidents, QuotedFields) {
  const auto t = parse("\"q,1\",X,\"Sick, \"\"unknown\"\"\",,2020-01-01T08:00:00Z,,,,Referred,,\n");
  ASSERT_EQ(t.records.size(), 1u);
  EXPECT_EQ(t.records[0].primary_key, "q,1");
  EXPECT_EQ(t.records[0].problem, "Sick, \"unknown\"");
  EXPECT_EQ(format_timestamp(*t.records[0].t_phone_pickup), "2020-01-01 08:00:00");
  EXPECT_EQ(t.report.referred, 1u);
}

TEST(ParseTimestamp, FormatsAndPattern) {
  EXPECT_EQ(ts("2020-03-17T12:01:02"), ts("2020-03-17 12:01:02"));
  EXPECT_FALSE(parse_timestamp("2020-03-17 25:00:00"));
  EXPECT_FALSE(parse_timestamp(""));
  const auto t = parse_timestamp("03/17/2020 12:01:02", "%m/%d/%Y %H:%M:%S");
  ASSERT_TRUE(t);
  EXPECT_EQ(*t, ts("2020-03-17 12:01:02"));
}

TEST(Classify, PandemicRefusalIsPandemicDefunct) {
  EXPECT_EQ(classify_incident(record("Pandemic", "Refusal")), (StreamLabel{Stream::pandemic, Status::defunct}));
}

TEST(Classify, FallTransportedIsNonPandemicAdmitted) {
  EXPECT_EQ(classify_incident(record("Fall", "Transported to hospital")),
            (StreamLabel{Stream::non_pandemic, Status::admitted}));
}

TEST(Classify, CaseAndWhitespaceNormalised) {
  EXPECT_EQ(classify_incident(record("PANDEMIC RESPIRATORY", " no patient ")),
            (StreamLabel{Stream::pandemic, Status::defunct}));
}

TEST(Classify, AllSevenDefunctLabelsAndExactMatch) {
  for (const char* d : {"Call Cancelled", "No Patient", "Other", "Refusal", "Duplicate Call", "False Alarm Call",
                        "Information Call Only"}) {
    EXPECT_EQ(classify_incident(record("Fall", d)).status, Status::defunct) << d;
  }
  EXPECT_EQ(classify_incident(record("Fall", "Referred")).status, Status::admitted);
  EXPECT_EQ(classify_incident(record("Fall", "Refusal of transport")).status, Status::admitted);
  EXPECT_EQ(classify_incident(record("Fall", "Other facility")).status, Status::admitted);
}

TEST(Classify, InvariantUnderCaseAndWhitespace) {
  synth::IncidentSynthSpec spec;
  spec.days = 3;
  spec.start = parse_date("2020-05-01");
  spec.period2_start = parse_date("2020-04-01");
  spec.period3_start = parse_date("2020-04-15");
  for (auto r : synth::gen_incidents(spec)) {
    const auto base = classify_incident(r);
    std::string up = r.problem, lo = r.disposition;
    for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    for (auto& c : lo) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    r.problem = "  " + up + "\t";
    r.disposition = " " + lo + "  ";
    EXPECT_EQ(classify_incident(r), base);
  }
}

TEST(DailyCounts, ThreeThenZero) {
  std::vector<IncidentRecord> rs(3, record("Fall", "Transported"));
  rs[0].t_phone_pickup = ts("2020-03-17 00:00:00");
  rs[1].t_phone_pickup = ts("2020-03-17 12:30:00");
  rs[2].t_phone_pickup = ts("2020-03-17 23:59:59");
  const auto s = daily_counts(rs, any_label(), parse_date("2020-03-17"), parse_date("2020-03-18"));
  EXPECT_EQ(s.values, (std::vector<double>{3, 0}));
}

TEST(DailyCounts, EmptyFilterGivesZeros) {
  std::vector<IncidentRecord> rs(2, record("Fall", "Transported"));
  rs[0].t_phone_pickup = rs[1].t_phone_pickup = ts("2020-03-17 10:00:00");
  const auto s = daily_counts(rs, only(Stream::pandemic, Status::defunct), parse_date("2020-03-15"),
                              parse_date("2020-03-19"));
  EXPECT_EQ(s.values, std::vector<double>(5, 0.0));
}

TEST(DailyCounts, RecordOutsideCalendarNamed) {
  std::vector<IncidentRecord> rs{record("Fall", "Transported")};
  rs[0].primary_key = "late-one";
  rs[0].t_phone_pickup = ts("2020-04-01 10:00:00");
  try {
    daily_counts(rs, any_label(), parse_date("2020-03-01"), parse_date("2020-03-31"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::range);
    EXPECT_NE(std::string(e.what()).find("late-one"), std::string::npos);
  }
}

TEST(DailyCounts, FourStreamsPartitionTheTotal) {
  synth::IncidentSynthSpec spec;
  spec.days = 120;
  spec.start = parse_date("2020-02-01");
  spec.seed = 17;
  const auto rs = synth::gen_incidents(spec);
  const Date a = spec.start, b = add_days(spec.start, 119);
  const auto total = daily_counts(rs, any_label(), a, b);
  std::vector<double> sum(total.size(), 0.0);
  for (auto stream : {Stream::pandemic, Stream::non_pandemic}) {
    for (auto status : {Status::admitted, Status::defunct}) {
      const auto s = daily_counts(rs, only(stream, status), a, b);
      EXPECT_EQ(s.size(), total.size());
      for (std::size_t i = 0; i < s.size(); ++i) sum[i] += s.values[i];
    }
  }
  EXPECT_EQ(sum, total.values);
  double n = 0;
  for (double v : total.values) n += v;
  EXPECT_EQ(n, static_cast<double>(rs.size()));
}

TEST(ResponseIntervals, SixtyTwoSeconds) {
  auto r = record("Fall", "Transported");
  r.t_phone_pickup = ts("2020-01-01 12:00:00");
  r.t_assigned = ts("2020-01-01 12:01:02");
  const auto iv = response_intervals(r);
  ASSERT_TRUE(iv.assignment_min);
  EXPECT_NEAR(*iv.assignment_min, 62.0 / 60.0, 1e-12);
  EXPECT_FALSE(iv.dispatch_min);
  EXPECT_FALSE(iv.arrival_min);
}

TEST(ResponseIntervals, EqualTimestampsGiveZeros) {
  auto r = record("Fall", "Transported");
  r.t_phone_pickup = r.t_assigned = r.t_enroute = r.t_arrived = ts("2020-01-01 12:00:00");
  const auto iv = response_intervals(r);
  EXPECT_EQ(*iv.assignment_min, 0.0);
  EXPECT_EQ(*iv.dispatch_min, 0.0);
  EXPECT_EQ(*iv.arrival_min, 0.0);
}

TEST(ResponseIntervals, MissingAssignedLeavesArrival) {
  auto r = record("Fall", "Transported");
  r.t_phone_pickup = ts("2020-01-01 12:00:00");
  r.t_enroute = ts("2020-01-01 12:03:00");
  r.t_arrived = ts("2020-01-01 12:10:30");
  const auto iv = response_intervals(r);
  EXPECT_FALSE(iv.assignment_min);
  EXPECT_FALSE(iv.dispatch_min);
  EXPECT_DOUBLE_EQ(*iv.arrival_min, 7.5);
}

TEST(ResponseIntervals, NegativeIntervalIsFlaggedError) {
  auto r = record("Fall", "Transported");
  r.t_enroute = ts("2020-01-01 12:03:00");
  r.t_arrived = ts("2020-01-01 12:02:00");
  try {
    response_intervals(r);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::flagged);
  }
}

TEST(Hospitalization, TwoRows) {
  std::istringstream in("date,count\n2020-04-09,5\n2020-04-10,7\n");
  const auto s = parse_hospitalization(in);
  EXPECT_EQ(s.size(), 2u);
  EXPECT_EQ(s.start, parse_date("2020-04-09"));
}

TEST(Hospitalization, GapNamesMissingDate) {
  std::istringstream in("date,count\n2020-04-09,5\n2020-04-11,7\n");
  try {
    parse_hospitalization(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::gap);
    EXPECT_NE(std::string(e.what()).find("2020-04-10"), std::string::npos);
  }
}

TEST(Hospitalization, NegativeCountIsDomainError) {
  std::istringstream in("date,count\n2020-04-09,5\n2020-04-10,-1\n");
  try {
    parse_hospitalization(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::domain);
  }
}

TEST(Hospitalization, FullWindowHas267Days) {
  std::ostringstream csv;
  csv << "date,count\n";
  for (Date d = parse_date("2020-04-09"); d <= parse_date("2020-12-31"); d = add_days(d, 1)) {
    csv << format_date(d) << ",10\n";
  }
  std::istringstream in(csv.str());
  EXPECT_EQ(parse_hospitalization(in).size(), 267u);
}

TEST(RoundTrip, SerializeAndReparseGivesIdenticalRecords) {
  synth::IncidentSynthSpec spec;
  spec.days = 10;
  spec.seed = 4;
  auto records = synth::gen_incidents(spec);
  records[0].problem = "Sick, \"quoted\"";
  records[1].t_assigned.reset();
  records[2].priority.reset();
  records[3].longitude.reset();
  std::stringstream ss;
  write_incidents(ss, records);
  const auto back = parse_incidents(ss);
  EXPECT_EQ(back.report.rows_rejected, 0u);
  EXPECT_EQ(back.records, records);
}
