#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tabx/rubric.hpp"
#include "tabx/table.hpp"

namespace tabx::perturb {

using model::Table;

enum class Kind {
    TypoInText,
    HeaderRephrase,
    DateFormatChange,
    ThousandsSeparatorToggle,
    UnitRescale,
    CurrencySymbolNormalize,
    DecimalRounding,
    HeaderReorder,
    SmallNumericShift,
    MergeTwoRows,
    RowReorder,
    AbbreviationSwap,
    DropRow,
    DropColumn,
    AddSpuriousColumn,
    TransposeTable,
};

enum class Difficulty { Easy, Medium, Hard };

Difficulty difficulty_of(Kind k);
const std::vector<Kind>& kinds_of(Difficulty d);
const std::vector<Kind>& all_kinds();

std::string kind_name(Kind k);
Kind kind_from_name(std::string_view name);
std::string difficulty_name(Difficulty d);
Difficulty difficulty_from_name(std::string_view name);

struct PerturbationSpec {
    Kind kind = Kind::TypoInText;
    Difficulty difficulty = Difficulty::Easy;
    std::uint64_t seed = 0;
    std::optional<std::size_t> target_row, target_col;
    std::map<std::string, std::string> params;
};

// Ground-truth labels for what a perfect evaluator reports on a single-kind
// case. `guaranteed` marks the kinds whose labels the deterministic pipeline
// must reproduce exactly; other kinds carry best-effort labels.
struct ExpectedOutcome {
    rubric::RubricCounts counts;
    std::vector<double> partial_magnitudes;
    bool transposed = false;
    bool guaranteed = false;

    bool formatting_only() const;
};

struct BenchmarkCase {
    std::string id;
    Table clean;
    Table perturbed;
    std::vector<PerturbationSpec> applied;
    std::string provenance;
    ExpectedOutcome expected;
};

// Chooses targets and parameters for one corruption of the given kind,
// deterministically from the seed. Throws KindInapplicable when the table has
// no suitable locus.
PerturbationSpec plan_perturbation(const Table& t, Kind kind, std::uint64_t seed);

// Applies one corruption. An unplanned spec (no params) is planned first from
// its seed, so apply(t, {kind, seed}) is a pure function of its arguments.
Table apply_perturbation(const Table& t, const PerturbationSpec& spec);

// No-op on an empty list.
Table apply_all(const Table& t, const std::vector<PerturbationSpec>& specs);

ExpectedOutcome expected_outcome(const Table& t, const PerturbationSpec& spec);

ExpectedOutcome expected_rubric(const BenchmarkCase& c);

using DifficultyMix = std::map<Difficulty, double>;

DifficultyMix default_mix();  // Easy 0.44, Medium 0.34, Hard 0.22

std::vector<BenchmarkCase> generate_benchmark(const std::vector<Table>& cleans, std::size_t per_table,
                                              const DifficultyMix& mix, std::uint64_t seed);

// Deterministic clean tables over several archetypes (films, cities, athletes,
// products); used when no external corpus is supplied.
std::vector<Table> synthetic_tables(std::size_t count, std::uint64_t seed);

// Directory layout: manifest.json plus tables/<case>.{clean,perturbed}.json in
// canonical form. The manifest carries seeds, specs, and expected labels.
void write_benchmark(const std::vector<BenchmarkCase>& cases, const std::string& dir, std::uint64_t master_seed,
                     const DifficultyMix& mix);
std::vector<BenchmarkCase> load_benchmark(const std::string& dir);

}  // namespace tabx::perturb
