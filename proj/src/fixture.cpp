#include "ehrq/fixture.hpp"

#include <fstream>
#include <random>
#include <vector>

#include "ehrq/csv.hpp"
#include "ehrq/error.hpp"
#include "ehrq/schema.hpp"
#include "ehrq/transpile.hpp"
#include "ehrq/value.hpp"

namespace ehrq {

namespace {

const std::vector<std::string> kFirstNames = {"john", "mary",  "ahmed", "wei",  "fatima", "james",
                                              "elena", "david", "sofia", "noor", "grace",  "omar",
                                              "lucas", "mia",   "ravi",  "anna"};
const std::vector<std::string> kLastNames = {"smith", "johnson", "lee",    "garcia", "chen",
                                             "patel", "brown",   "muller", "silva",  "kim"};
const std::vector<std::string> kAdmissionTypes = {"emergency", "elective", "urgent", "newborn"};
// Multi-word drug names exercise quoted-token handling end to end.
const std::vector<std::string> kDrugs = {"insulin human",     "heparin sodium",
                                         "aspirin",           "normal saline",
                                         "morphine sulfate",  "potassium chloride",
                                         "antihypertensive agent", "warfarin"};
const std::vector<std::string> kRoutes = {"oral", "iv", "im", "topical"};
const std::vector<std::string> kFlags = {"normal", "abnormal", "delta"};
const std::vector<std::string> kDiagTitles = {
    "essential hypertension", "type 2 diabetes",      "atrial fibrillation",
    "acute kidney injury",    "community acquired pneumonia",
    "congestive heart failure", "urinary tract infection", "septicemia"};
const std::vector<std::string> kProcTitles = {
    "coronary artery bypass", "central line placement", "mechanical ventilation",
    "hemodialysis",           "appendectomy",           "hip replacement",
    "cardiac catheterization", "wound debridement"};
const std::vector<std::string> kLabLabels = {
    "blood urea nitrogen", "serum creatinine", "white blood cell count", "hemoglobin a1c",
    "platelet count",      "serum sodium",     "serum potassium",        "lactate"};
const std::vector<std::string> kFluids = {"blood", "urine", "csf"};
const std::vector<std::string> kCategories = {"chemistry", "hematology", "blood gas"};

struct PatientRow {
  std::int64_t subject_id;
  std::string name;
  std::int64_t dob;
  std::string gender;
  std::int64_t age;
};
struct AdmissionRow {
  std::int64_t hadm_id, subject_id, admit_year, days_stay;
  std::string admission_type;
};
struct DiagnosisRow {
  std::int64_t diag_id, hadm_id, seq_num;
  std::string icd9_code, short_title, long_title;  // the event's code-table row
};
struct ProcedureRow {
  std::int64_t proc_id, diag_id, hadm_id, timestep;
  std::string icd9_code, short_title, long_title;
};
struct PrescriptionRow {
  std::int64_t hadm_id, timestep;
  std::string drug, dosage, route;
};
struct LabRow {
  std::int64_t lab_id, hadm_id;
  std::string flag;
  double value_num;
  std::string label, fluid, category;  // the item-table row
};

struct Facts {
  std::vector<PatientRow> patients;
  std::vector<AdmissionRow> admissions;
  std::vector<DiagnosisRow> diagnoses;
  std::vector<ProcedureRow> procedures;
  std::vector<PrescriptionRow> prescriptions;
  std::vector<LabRow> labs;
};

Facts generate_facts(const FixtureSpec& spec) {
  if (spec.n_patients < 1) fail(ErrorKind::parse, "n_patients must be >= 1");
  std::mt19937_64 rng(spec.seed);
  auto pick = [&rng](std::size_t bound) { return static_cast<std::int64_t>(rng() % bound); };

  Facts f;
  std::int64_t next_hadm = 10000, next_diag = 100000, next_proc = 500000, next_lab = 900000;
  for (int i = 0; i < spec.n_patients; ++i) {
    PatientRow p;
    p.subject_id = i + 1;
    p.name = kFirstNames[pick(kFirstNames.size())] + " " + kLastNames[pick(kLastNames.size())];
    p.dob = 1930 + pick(81);
    p.gender = pick(2) ? "f" : "m";
    p.age = 18 + pick(80);
    f.patients.push_back(p);

    const std::int64_t n_adm = 1 + pick(3);
    for (std::int64_t a = 0; a < n_adm; ++a) {
      AdmissionRow adm;
      adm.hadm_id = next_hadm++;
      adm.subject_id = p.subject_id;
      adm.admit_year = 2100 + pick(40);
      adm.admission_type = kAdmissionTypes[pick(kAdmissionTypes.size())];
      adm.days_stay = 1 + pick(59);
      f.admissions.push_back(adm);

      std::vector<std::int64_t> adm_diags;
      const std::int64_t n_diag = pick(6);
      for (std::int64_t d = 0; d < n_diag; ++d) {
        DiagnosisRow diag;
        diag.diag_id = next_diag++;
        diag.hadm_id = adm.hadm_id;
        diag.seq_num = 1 + pick(5);
        const auto idx = pick(kDiagTitles.size());
        diag.icd9_code = "d" + std::to_string(4000 + idx * 7 + pick(5));
        diag.short_title = kDiagTitles[idx];
        diag.long_title = kDiagTitles[idx] + " unspecified";
        adm_diags.push_back(diag.diag_id);
        f.diagnoses.push_back(std::move(diag));
      }
      const std::int64_t n_proc = adm_diags.empty() ? 0 : pick(6);
      for (std::int64_t q = 0; q < n_proc; ++q) {
        ProcedureRow proc;
        proc.proc_id = next_proc++;
        proc.diag_id = adm_diags[pick(adm_diags.size())];
        proc.hadm_id = adm.hadm_id;
        proc.timestep = pick(200);
        const auto idx = pick(kProcTitles.size());
        proc.icd9_code = "p" + std::to_string(300 + idx * 3 + pick(3));
        proc.short_title = kProcTitles[idx];
        proc.long_title = kProcTitles[idx] + " procedure";
        f.procedures.push_back(std::move(proc));
      }
      const std::int64_t n_rx = pick(6);
      for (std::int64_t r = 0; r < n_rx; ++r) {
        PrescriptionRow rx;
        rx.hadm_id = adm.hadm_id;
        rx.drug = kDrugs[pick(kDrugs.size())];
        rx.dosage = std::to_string(1 + pick(500)) + "mg";
        rx.route = kRoutes[pick(kRoutes.size())];
        rx.timestep = pick(200);
        f.prescriptions.push_back(std::move(rx));
      }
      const std::int64_t n_lab = pick(6);
      for (std::int64_t l = 0; l < n_lab; ++l) {
        LabRow lab;
        lab.lab_id = next_lab++;
        lab.hadm_id = adm.hadm_id;
        lab.flag = kFlags[pick(kFlags.size())];
        lab.value_num = static_cast<double>(1 + pick(9999)) / 10.0;
        const auto idx = pick(kLabLabels.size());
        lab.label = kLabLabels[idx];
        lab.fluid = kFluids[pick(kFluids.size())];
        lab.category = kCategories[pick(kCategories.size())];
        f.labs.push_back(std::move(lab));
      }
    }
  }
  return f;
}

ColumnSpec pk(const std::string& name, Datatype dt = Datatype::integer) {
  return {name, ColumnRole::primary_key, "", dt};
}
ColumnSpec fk(const std::string& name, const std::string& references,
              Datatype dt = Datatype::integer) {
  return {name, ColumnRole::foreign_key, references, dt};
}
ColumnSpec prop(const std::string& name, Datatype dt) {
  return {name, ColumnRole::property, "", dt};
}

SchemaManifest nine_table_manifest() {
  SchemaManifest m;
  m.tables.push_back({"patients",
                      {pk("subject_id"), prop("name", Datatype::text), prop("dob", Datatype::integer),
                       prop("gender", Datatype::text), prop("age", Datatype::integer)},
                      "subject_id"});
  m.tables.push_back({"admissions",
                      {pk("hadm_id"), fk("subject_id", "patients"),
                       prop("admit_year", Datatype::integer), prop("admission_type", Datatype::text),
                       prop("days_stay", Datatype::integer)},
                      "hadm_id"});
  m.tables.push_back({"diagnoses",
                      {pk("diag_id"), fk("hadm_id", "admissions"),
                       prop("seq_num", Datatype::integer)},
                      "diag_id"});
  m.tables.push_back({"d_icd_diagnoses",
                      {fk("diag_id", "diagnoses"), prop("icd9_code", Datatype::text),
                       prop("short_title", Datatype::text), prop("long_title", Datatype::text)},
                      std::nullopt});
  m.tables.push_back({"procedures",
                      {pk("proc_id"), fk("diag_id", "diagnoses"),
                       prop("timestep", Datatype::integer)},
                      "proc_id"});
  m.tables.push_back({"d_icd_procedures",
                      {fk("proc_id", "procedures"), prop("icd9_code", Datatype::text),
                       prop("short_title", Datatype::text), prop("long_title", Datatype::text)},
                      std::nullopt});
  m.tables.push_back({"prescriptions",
                      {fk("hadm_id", "admissions"), prop("drug", Datatype::text),
                       prop("dosage", Datatype::text), prop("route", Datatype::text),
                       prop("timestep", Datatype::integer)},
                      std::nullopt});
  m.tables.push_back({"lab",
                      {pk("lab_id"), fk("hadm_id", "admissions"), prop("flag", Datatype::text),
                       prop("value_num", Datatype::real)},
                      "lab_id"});
  m.tables.push_back({"d_labitems",
                      {fk("lab_id", "lab"), prop("label", Datatype::text),
                       prop("fluid", Datatype::text), prop("category", Datatype::text)},
                      std::nullopt});
  return m;
}

SchemaManifest five_table_manifest() {
  SchemaManifest m;
  m.tables.push_back({"demographic",
                      {pk("hadm_id"), prop("subject_id", Datatype::integer),
                       prop("name", Datatype::text), prop("dob", Datatype::integer),
                       prop("gender", Datatype::text), prop("age", Datatype::integer),
                       prop("admit_year", Datatype::integer),
                       prop("admission_type", Datatype::text),
                       prop("days_stay", Datatype::integer)},
                      "hadm_id"});
  m.tables.push_back({"diagnoses",
                      {fk("hadm_id", "demographic"), prop("seq_num", Datatype::integer),
                       prop("icd9_code", Datatype::text), prop("short_title", Datatype::text),
                       prop("long_title", Datatype::text)},
                      std::nullopt});
  m.tables.push_back({"procedures",
                      {fk("hadm_id", "demographic"), prop("timestep", Datatype::integer),
                       prop("icd9_code", Datatype::text), prop("short_title", Datatype::text),
                       prop("long_title", Datatype::text)},
                      std::nullopt});
  m.tables.push_back({"prescriptions",
                      {fk("hadm_id", "demographic"), prop("drug", Datatype::text),
                       prop("dosage", Datatype::text), prop("route", Datatype::text),
                       prop("timestep", Datatype::integer)},
                      std::nullopt});
  m.tables.push_back({"lab",
                      {fk("hadm_id", "demographic"), prop("flag", Datatype::text),
                       prop("value_num", Datatype::real), prop("label", Datatype::text),
                       prop("fluid", Datatype::text), prop("category", Datatype::text)},
                      std::nullopt});
  return m;
}

std::vector<QueryTemplate> nine_table_templates() {
  auto col = [](const char* t, const char* c) { return ColumnRef{t, c}; };
  std::vector<QueryTemplate> ts;
  ts.push_back({"what is the maximum age of patients whose gender is |val1|",
                "select max ( patients.age ) from patients where patients.gender = |val1|",
                {{"val1", col("patients", "gender")}}});
  ts.push_back({"list the name and dob of patients older than |val1|",
                "select patients.name , patients.dob from patients where patients.age > |val1|",
                {{"val1", col("patients", "age")}}});
  ts.push_back({"how many admissions do patients of gender |val1| have",
                "select count ( admissions.hadm_id ) from patients inner join admissions on "
                "patients.subject_id = admissions.subject_id where patients.gender = |val1|",
                {{"val1", col("patients", "gender")}}});
  ts.push_back({"what admission types does patient |val1| have",
                "select admissions.admission_type from patients inner join admissions on "
                "patients.subject_id = admissions.subject_id where patients.subject_id = |val1|",
                {{"val1", col("patients", "subject_id")}}});
  ts.push_back({"count the prescription timesteps for drug |val1|",
                "select count ( prescriptions.timestep ) from patients inner join admissions on "
                "patients.subject_id = admissions.subject_id inner join prescriptions on "
                "admissions.hadm_id = prescriptions.hadm_id where prescriptions.drug = |val1|",
                {{"val1", col("prescriptions", "drug")}}});
  ts.push_back({"what is the average lab value for labs flagged |val1|",
                "select avg ( lab.value_num ) from patients inner join admissions on "
                "patients.subject_id = admissions.subject_id inner join lab on "
                "admissions.hadm_id = lab.hadm_id where lab.flag = |val1|",
                {{"val1", col("lab", "flag")}}});
  ts.push_back({"how many lab items measure fluid |val1|",
                "select count ( d_labitems.row_id ) from patients inner join admissions on "
                "patients.subject_id = admissions.subject_id inner join lab on "
                "admissions.hadm_id = lab.hadm_id inner join d_labitems on lab.lab_id = "
                "d_labitems.lab_id where d_labitems.fluid = |val1|",
                {{"val1", col("d_labitems", "fluid")}}});
  ts.push_back({"list short titles of diagnoses for patients of gender |val1| admitted after "
                "|val2|",
                "select d_icd_diagnoses.short_title from patients inner join admissions on "
                "patients.subject_id = admissions.subject_id inner join diagnoses on "
                "admissions.hadm_id = diagnoses.hadm_id inner join d_icd_diagnoses on "
                "diagnoses.diag_id = d_icd_diagnoses.diag_id where patients.gender = |val1| and "
                "admissions.admit_year > |val2|",
                {{"val1", col("patients", "gender")}, {"val2", col("admissions", "admit_year")}}});
  ts.push_back({"how many procedures are titled |val1|",
                "select count ( procedures.proc_id ) from patients inner join admissions on "
                "patients.subject_id = admissions.subject_id inner join diagnoses on "
                "admissions.hadm_id = diagnoses.hadm_id inner join procedures on "
                "diagnoses.diag_id = procedures.diag_id inner join d_icd_procedures on "
                "procedures.proc_id = d_icd_procedures.proc_id where "
                "d_icd_procedures.short_title = |val1|",
                {{"val1", col("d_icd_procedures", "short_title")}}});
  ts.push_back({"count patients diagnosed with |val1| who had a procedure after timestep |val2|",
                "select count ( patients.subject_id ) from patients inner join admissions on "
                "patients.subject_id = admissions.subject_id inner join diagnoses on "
                "admissions.hadm_id = diagnoses.hadm_id inner join d_icd_diagnoses on "
                "diagnoses.diag_id = d_icd_diagnoses.diag_id inner join procedures on "
                "diagnoses.diag_id = procedures.diag_id inner join d_icd_procedures on "
                "procedures.proc_id = d_icd_procedures.proc_id where "
                "d_icd_diagnoses.short_title = |val1| and procedures.timestep > |val2|",
                {{"val1", col("d_icd_diagnoses", "short_title")},
                 {"val2", col("procedures", "timestep")}}});
  return ts;
}

std::vector<QueryTemplate> five_table_templates() {
  auto col = [](const char* t, const char* c) { return ColumnRef{t, c}; };
  std::vector<QueryTemplate> ts;
  ts.push_back({"how many admissions are there for patients of gender |val1|",
                "select count ( demographic.hadm_id ) from demographic where "
                "demographic.gender = |val1|",
                {{"val1", col("demographic", "gender")}}});
  ts.push_back({"list names of patients admitted as |val1|",
                "select demographic.name from demographic where demographic.admission_type = "
                "|val1|",
                {{"val1", col("demographic", "admission_type")}}});
  ts.push_back({"what is the maximum age of patients born after |val1|",
                "select max ( demographic.age ) from demographic where demographic.dob > |val1|",
                {{"val1", col("demographic", "dob")}}});
  ts.push_back({"how many diagnoses are coded |val1|",
                "select count ( diagnoses.row_id ) from demographic inner join diagnoses on "
                "demographic.hadm_id = diagnoses.hadm_id where diagnoses.icd9_code = |val1|",
                {{"val1", col("diagnoses", "icd9_code")}}});
  ts.push_back({"count prescriptions of drug |val1| for patients of gender |val2|",
                "select count ( prescriptions.row_id ) from demographic inner join prescriptions "
                "on demographic.hadm_id = prescriptions.hadm_id where prescriptions.drug = |val1| "
                "and demographic.gender = |val2|",
                {{"val1", col("prescriptions", "drug")},
                 {"val2", col("demographic", "gender")}}});
  ts.push_back({"what lab categories were flagged |val1|",
                "select lab.category from demographic inner join lab on demographic.hadm_id = "
                "lab.hadm_id where lab.flag = |val1|",
                {{"val1", col("lab", "flag")}}});
  return ts;
}

ColumnMapping five_to_nine_mapping() {
  ColumnMapping m;
  auto add = [&m](const char* st, const char* sc, const char* tt, const char* tc) {
    m.entries[ColumnRef{st, sc}] = ColumnRef{tt, tc};
  };
  add("demographic", "hadm_id", "admissions", "hadm_id");
  add("demographic", "subject_id", "patients", "subject_id");
  add("demographic", "name", "patients", "name");
  add("demographic", "dob", "patients", "dob");
  add("demographic", "gender", "patients", "gender");
  add("demographic", "age", "patients", "age");
  add("demographic", "admit_year", "admissions", "admit_year");
  add("demographic", "admission_type", "admissions", "admission_type");
  add("demographic", "days_stay", "admissions", "days_stay");
  add("diagnoses", "row_id", "d_icd_diagnoses", "row_id");
  add("diagnoses", "hadm_id", "admissions", "hadm_id");
  add("diagnoses", "seq_num", "diagnoses", "seq_num");
  add("diagnoses", "icd9_code", "d_icd_diagnoses", "icd9_code");
  add("diagnoses", "short_title", "d_icd_diagnoses", "short_title");
  add("diagnoses", "long_title", "d_icd_diagnoses", "long_title");
  add("procedures", "row_id", "d_icd_procedures", "row_id");
  add("procedures", "hadm_id", "admissions", "hadm_id");
  add("procedures", "timestep", "procedures", "timestep");
  add("procedures", "icd9_code", "d_icd_procedures", "icd9_code");
  add("procedures", "short_title", "d_icd_procedures", "short_title");
  add("procedures", "long_title", "d_icd_procedures", "long_title");
  add("prescriptions", "row_id", "prescriptions", "row_id");
  add("prescriptions", "hadm_id", "admissions", "hadm_id");
  add("prescriptions", "drug", "prescriptions", "drug");
  add("prescriptions", "dosage", "prescriptions", "dosage");
  add("prescriptions", "route", "prescriptions", "route");
  add("prescriptions", "timestep", "prescriptions", "timestep");
  add("lab", "row_id", "lab", "lab_id");
  add("lab", "hadm_id", "admissions", "hadm_id");
  add("lab", "flag", "lab", "flag");
  add("lab", "value_num", "lab", "value_num");
  add("lab", "label", "d_labitems", "label");
  add("lab", "fluid", "d_labitems", "fluid");
  add("lab", "category", "d_labitems", "category");
  return m;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write '" + path.string() + "'");
  out << content;
}

std::string i2s(std::int64_t v) { return std::to_string(v); }

}  // namespace

void gen_fixture(const FixtureSpec& spec, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(ErrorKind::io, "cannot create '" + out_dir.string() + "': " + ec.message());

  const Facts f = generate_facts(spec);

  if (spec.schema == FixtureSchema::nine_table) {
    const SchemaManifest manifest = nine_table_manifest();
    validate_manifest(manifest);
    write_file(out_dir / "manifest.json", manifest_to_json(manifest).dump(2) + "\n");

    std::string csv = csv_line({"subject_id", "name", "dob", "gender", "age"});
    for (const auto& p : f.patients)
      csv += csv_line({i2s(p.subject_id), p.name, i2s(p.dob), p.gender, i2s(p.age)});
    write_file(out_dir / "patients.csv", csv);

    csv = csv_line({"hadm_id", "subject_id", "admit_year", "admission_type", "days_stay"});
    for (const auto& a : f.admissions)
      csv += csv_line({i2s(a.hadm_id), i2s(a.subject_id), i2s(a.admit_year), a.admission_type,
                       i2s(a.days_stay)});
    write_file(out_dir / "admissions.csv", csv);

    csv = csv_line({"diag_id", "hadm_id", "seq_num"});
    for (const auto& d : f.diagnoses)
      csv += csv_line({i2s(d.diag_id), i2s(d.hadm_id), i2s(d.seq_num)});
    write_file(out_dir / "diagnoses.csv", csv);

    csv = csv_line({"diag_id", "icd9_code", "short_title", "long_title"});
    for (const auto& d : f.diagnoses)
      csv += csv_line({i2s(d.diag_id), d.icd9_code, d.short_title, d.long_title});
    write_file(out_dir / "d_icd_diagnoses.csv", csv);

    csv = csv_line({"proc_id", "diag_id", "timestep"});
    for (const auto& p : f.procedures)
      csv += csv_line({i2s(p.proc_id), i2s(p.diag_id), i2s(p.timestep)});
    write_file(out_dir / "procedures.csv", csv);

    csv = csv_line({"proc_id", "icd9_code", "short_title", "long_title"});
    for (const auto& p : f.procedures)
      csv += csv_line({i2s(p.proc_id), p.icd9_code, p.short_title, p.long_title});
    write_file(out_dir / "d_icd_procedures.csv", csv);

    csv = csv_line({"hadm_id", "drug", "dosage", "route", "timestep"});
    for (const auto& r : f.prescriptions)
      csv += csv_line({i2s(r.hadm_id), r.drug, r.dosage, r.route, i2s(r.timestep)});
    write_file(out_dir / "prescriptions.csv", csv);

    csv = csv_line({"lab_id", "hadm_id", "flag", "value_num"});
    for (const auto& l : f.labs)
      csv += csv_line({i2s(l.lab_id), i2s(l.hadm_id), l.flag, format_double(l.value_num)});
    write_file(out_dir / "lab.csv", csv);

    csv = csv_line({"lab_id", "label", "fluid", "category"});
    for (const auto& l : f.labs)
      csv += csv_line({i2s(l.lab_id), l.label, l.fluid, l.category});
    write_file(out_dir / "d_labitems.csv", csv);

    write_file(out_dir / "templates.json",
               templates_to_json(nine_table_templates()).dump(2) + "\n");
  } else {
    const SchemaManifest manifest = five_table_manifest();
    validate_manifest(manifest);
    write_file(out_dir / "manifest.json", manifest_to_json(manifest).dump(2) + "\n");

    auto patient_of = [&](std::int64_t subject_id) -> const PatientRow& {
      return f.patients[static_cast<std::size_t>(subject_id - 1)];
    };
    std::string csv = csv_line({"hadm_id", "subject_id", "name", "dob", "gender", "age",
                                "admit_year", "admission_type", "days_stay"});
    for (const auto& a : f.admissions) {
      const PatientRow& p = patient_of(a.subject_id);
      csv += csv_line({i2s(a.hadm_id), i2s(p.subject_id), p.name, i2s(p.dob), p.gender,
                       i2s(p.age), i2s(a.admit_year), a.admission_type, i2s(a.days_stay)});
    }
    write_file(out_dir / "demographic.csv", csv);

    csv = csv_line({"hadm_id", "seq_num", "icd9_code", "short_title", "long_title"});
    for (const auto& d : f.diagnoses)
      csv += csv_line({i2s(d.hadm_id), i2s(d.seq_num), d.icd9_code, d.short_title, d.long_title});
    write_file(out_dir / "diagnoses.csv", csv);

    csv = csv_line({"hadm_id", "timestep", "icd9_code", "short_title", "long_title"});
    for (const auto& p : f.procedures)
      csv += csv_line({i2s(p.hadm_id), i2s(p.timestep), p.icd9_code, p.short_title, p.long_title});
    write_file(out_dir / "procedures.csv", csv);

    csv = csv_line({"hadm_id", "drug", "dosage", "route", "timestep"});
    for (const auto& r : f.prescriptions)
      csv += csv_line({i2s(r.hadm_id), r.drug, r.dosage, r.route, i2s(r.timestep)});
    write_file(out_dir / "prescriptions.csv", csv);

    csv = csv_line({"hadm_id", "flag", "value_num", "label", "fluid", "category"});
    for (const auto& l : f.labs)
      csv += csv_line({i2s(l.hadm_id), l.flag, format_double(l.value_num), l.label, l.fluid,
                       l.category});
    write_file(out_dir / "lab.csv", csv);

    write_file(out_dir / "templates.json",
               templates_to_json(five_table_templates()).dump(2) + "\n");
    write_file(out_dir / "mapping_to_nine.json",
               mapping_to_json(five_to_nine_mapping()).dump(2) + "\n");
  }
}

}  // namespace ehrq
