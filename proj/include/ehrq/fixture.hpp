#pragma once

#include <cstdint>
#include <filesystem>

namespace ehrq {

enum class FixtureSchema { five_table, nine_table };

struct FixtureSpec {
  int n_patients = 100;
  std::uint64_t seed = 42;
  FixtureSchema schema = FixtureSchema::nine_table;
};

/// Writes manifest.json, one CSV per table, templates.json and (for the
/// five-table schema) mapping_to_nine.json into `out_dir`. The same seed
/// produces the same underlying facts for both schemas, so a query
/// renormalized from the five-table form must return identical results on
/// the nine-table fixture. Output is byte-deterministic per (spec, seed).
void gen_fixture(const FixtureSpec& spec, const std::filesystem::path& out_dir);

}  // namespace ehrq
