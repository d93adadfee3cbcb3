#include <gtest/gtest.h>

#include <filesystem>

#include "linkforge/records.hpp"

namespace lf = linkforge;

namespace {

lf::csv::Table table(const std::string& s) { return lf::csv::parse(s); }

const char* kResidents =
    "id,name,age,sex,village,household\n"
    "R1,Jason Max Nissima,34,F,Nsiika 2,H7\n"
    "R2,Grace Akello,abc,F,Nsiika 2,H7\n"
    "R3,Baby Akello,4,M,Nsiika 2,H7\n";

}  // namespace

TEST(LoadResidents, DirectFieldMapping) {
  const auto out = lf::load_residents(table(kResidents));
  ASSERT_EQ(out.records.size(), 3u);
  const auto& r = out.records[0];
  EXPECT_EQ(r.resident_id, "R1");
  EXPECT_EQ(r.raw_name, "Jason Max Nissima");
  EXPECT_EQ(r.age, 34);
  EXPECT_TRUE(r.is_adult);
  EXPECT_EQ(r.sex, lf::Sex::female);
  EXPECT_EQ(r.village, "Nsiika 2");
  EXPECT_EQ(r.household_id, "H7");
  EXPECT_FALSE(out.records[2].is_adult);
}

TEST(LoadResidents, MalformedAgeBecomesMissingWithWarning) {
  const auto out = lf::load_residents(table(kResidents));
  const auto& r = out.records[1];
  EXPECT_FALSE(r.age);
  EXPECT_FALSE(r.is_adult);
  EXPECT_EQ(out.report.warnings.at("malformed_age"), 1u);
}

TEST(LoadResidents, OutOfRangeAges) {
  const auto out = lf::load_residents(table("id,name,age,village,household\nA,x,-1,v,h\nB,y,121,v,h\nC,z,120,v,h\n"));
  EXPECT_FALSE(out.records[0].age);
  EXPECT_FALSE(out.records[1].age);
  EXPECT_EQ(out.records[2].age, 120);
  EXPECT_EQ(out.report.warnings.at("malformed_age"), 2u);
}

TEST(LoadResidents, DuplicateIdIsFatal) {
  try {
    lf::load_residents(table("id,name,village,household\nR9,a,v,h\nR9,b,v,h\n"));
    FAIL();
  } catch (const lf::Error& e) {
    EXPECT_EQ(e.kind(), lf::ErrorKind::validation);
  }
}

TEST(LoadResidents, MissingRequiredColumn) {
  try {
    lf::load_residents(table("id,name,village\nR1,a,v\n"));
    FAIL();
  } catch (const lf::Error& e) {
    EXPECT_EQ(e.kind(), lf::ErrorKind::schema);
  }
}

TEST(LoadResidents, CustomSchemaAndCovariates) {
  lf::ResidentSchema s;
  s.id = "pid";
  s.household = "hh";
  const auto out = lf::load_residents(
      table("pid,name,village,hh,stable,education,wealth_index\nP1,a b,v,h1,0,primary,3\n"), s);
  ASSERT_EQ(out.records.size(), 1u);
  EXPECT_FALSE(out.records[0].is_stable);
  EXPECT_EQ(out.records[0].covariates.education, "primary");
  EXPECT_EQ(out.records[0].covariates.wealth_index, "3");
  EXPECT_FALSE(out.records[0].covariates.occupation);
}

TEST(LoadContacts, DirectMappingAndDrops) {
  const auto res = lf::load_residents(table(kResidents));
  const auto out = lf::load_contacts(table("namer_id,domain,name,age,village\n"
                                           "R1,money,Akello Grace,28,Nsiika 2\n"
                                           "R1,health,   ,30,Nsiika 2\n"
                                           "R404,food,Someone,30,x\n"),
                                     lf::ContactSchema{}, res.records, "nsiika");
  ASSERT_EQ(out.records.size(), 1u);
  const auto& c = out.records[0];
  EXPECT_EQ(c.domain, lf::Domain::money);
  EXPECT_EQ(c.reported_age, 28);
  EXPECT_EQ(c.reported_village, "Nsiika 2");
  EXPECT_EQ(c.contact_id, "nsiika-c000001");
  EXPECT_EQ(out.report.dropped.at("empty_name"), 1u);
  EXPECT_EQ(out.report.dropped.at("unknown_namer"), 1u);
  EXPECT_EQ(out.report.rows_in, out.report.records_out + out.report.dropped_total());
}

TEST(LoadContacts, SeventhContactInDomainWarns) {
  const auto res = lf::load_residents(table(kResidents));
  std::string csv = "namer_id,domain,name\n";
  for (int i = 0; i < 7; ++i) csv += "R1,money,Person " + std::to_string(i) + "\n";
  const auto out = lf::load_contacts(table(csv), lf::ContactSchema{}, res.records, "x");
  EXPECT_EQ(out.records.size(), 7u);
  EXPECT_EQ(out.report.warnings.at("domain_cap"), 1u);
}

TEST(LoadContacts, SurrogateIdsAreDeterministic) {
  const auto res = lf::load_residents(table(kResidents));
  const std::string csv = "namer_id,domain,name\nR1,food,a\nR1,food,\nR1,food,c\n";
  const auto a = lf::load_contacts(table(csv), lf::ContactSchema{}, res.records, "k");
  const auto b = lf::load_contacts(table(csv), lf::ContactSchema{}, res.records, "k");
  EXPECT_EQ(a.records, b.records);
  // ordinals count data rows, including dropped ones
  EXPECT_EQ(a.records[1].contact_id, "k-c000003");
}

TEST(Dataset, ExportReloadRoundTrip) {
  lf::CommunityDataset ds;
  ds.community_id = "demo";
  ds.residents = lf::load_residents(table("id,name,age,sex,village,household,stable,education\n"
                                          "R1,\"Okello, John\",40,M,Kamuge,H1,1,secondary\n"
                                          "R2,Ann Auma,,F,Kamuge B,H2,0,\n"))
                     .records;
  ds.contacts = lf::load_contacts(table("namer_id,domain,name,age,village\nR1,emotional,Ann Auma,33,Kamuge B\n"),
                                  lf::ContactSchema{}, ds.residents, ds.community_id)
                    .records;
  ds.village_registry = {"Kamuge", "Kamuge B"};
  const auto dir = std::filesystem::temp_directory_path() / "linkforge_records_roundtrip";
  std::filesystem::remove_all(dir);
  lf::export_dataset(ds, dir);
  const auto back = lf::import_dataset(dir, "demo");
  EXPECT_EQ(back.dataset, ds);
  std::filesystem::remove_all(dir);
}
