#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "provpipe/pipeline.hpp"

namespace provpipe {

/// Synthetic customers/mails generator configuration. Half of the customers
/// are German premium customers; the affected customers are always German
/// premium with at least one mail, so maintenance requests are never
/// vacuous.
struct GenConfig {
    std::size_t n_mails = 1;
    std::size_t n_customers = 1;
    std::uint64_t seed = 0;
    std::size_t affected_customers = 5;

    void validate() const;

    /// Customers default to a 10:1 mails-to-customers ratio.
    static GenConfig for_mails(std::size_t n_mails, std::uint64_t seed,
                               std::size_t affected_customers = 5);
};

struct GeneratedData {
    SourceTable customers;
    SourceTable mails;
    std::vector<std::size_t> affected_customer_rows;
    /// Every mail row belonging to an affected customer; their subjects
    /// carry a CARD<digits> sentinel token so redaction is observable.
    std::vector<std::size_t> affected_mail_rows;
};

/// Deterministic in the seed: same seed, same tables.
GeneratedData generate_data(const GenConfig& cfg);

struct TimingRecord {
    std::size_t n_mails = 0;
    long long trial = 0;  // -1 marks the per-size mean row
    double t_full_s = 0.0;
    double t_ivm_s = 0.0;
    double phase_plan_s = 0.0;
    double phase_apply_s = 0.0;
    double phase_unlearn_s = 0.0;
};

struct BenchConfig {
    std::vector<std::size_t> sizes;  // ascending n_mails
    std::size_t trials = 7;
    std::size_t affected_customers = 5;
    std::uint64_t seed = 42;
    double tau = 1e-3;
};

/// For each size: generates data, captures once, then per trial measures the
/// incremental update (plan + apply on a freshly loaded bundle) against full
/// re-execution (capture from scratch on redacted inputs). The incrementally
/// updated bundle is checked against the re-execution reference before any
/// timing is reported. Appends one mean record (trial = -1) per size.
std::vector<TimingRecord> run_bench(const BenchConfig& cfg);

/// CSV with the column header used by the bench CLI.
std::string timings_to_csv(const std::vector<TimingRecord>& records);

/// Writes a source table as delimited text with a header row.
std::string table_to_delimited(const SourceTable& table, char delimiter);

}  // namespace provpipe
