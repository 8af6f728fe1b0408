#include "provpipe/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <random>

#include "provpipe/csv.hpp"
#include "provpipe/errors.hpp"
#include "provpipe/ivm.hpp"
#include "provpipe/store.hpp"

namespace provpipe {

namespace {

const char* kWords[] = {
    "account", "transfer", "question", "service",  "request",  "card",    "payment",
    "balance", "issue",    "urgent",   "help",     "invoice",  "charge",  "refund",
    "update",  "branch",   "online",   "login",    "statement", "credit",  "mortgage",
    "rate",    "deposit",  "savings",  "problem",  "error",     "delay",   "confirm",
    "details", "contact",  "support",  "complaint"};
constexpr std::size_t kWordCount = sizeof(kWords) / sizeof(kWords[0]);

const char* kBanks[] = {"nordbank", "suedbank", "westbank", "ostbank"};
const char* kOtherCountries[] = {"FR", "NL", "PL", "AT"};

std::string random_sentence(std::mt19937_64& rng) {
    std::size_t tokens = 8 + rng() % 13;  // 8..20
    std::string out;
    for (std::size_t t = 0; t < tokens; ++t) {
        if (t > 0) out += ' ';
        out += kWords[rng() % kWordCount];
    }
    return out;
}

std::string sentinel_token(std::mt19937_64& rng) {
    return "CARD" + std::to_string(10000000 + rng() % 90000000);
}

}  // namespace

void GenConfig::validate() const {
    if (n_mails < 1 || n_customers < 1) {
        throw ValidationError("generator needs at least one mail and one customer");
    }
    if (affected_customers < 1) {
        throw ValidationError("affected_customers must be >= 1");
    }
    if (affected_customers > n_customers) {
        throw ValidationError("affected_customers exceeds customer count");
    }
    std::size_t premium_slots = (n_customers + 1) / 2;
    if (affected_customers > premium_slots) {
        throw ValidationError("affected_customers exceeds the German premium half");
    }
    if (affected_customers > n_mails) {
        throw ValidationError("not enough mails to give every affected customer one");
    }
}

GenConfig GenConfig::for_mails(std::size_t n_mails, std::uint64_t seed,
                               std::size_t affected_customers) {
    GenConfig cfg;
    cfg.n_mails = n_mails;
    cfg.n_customers = std::max<std::size_t>(1, n_mails / 10);
    cfg.seed = seed;
    cfg.affected_customers = affected_customers;
    return cfg;
}

GeneratedData generate_data(const GenConfig& cfg) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);

    GeneratedData data;
    data.customers.schema = complaints_customers_schema();
    data.mails.schema = complaints_mails_schema();

    // Even ordinals are German premium customers; odd ordinals are anything
    // but, keeping the configured 0.5 fraction.
    for (std::size_t i = 0; i < cfg.n_customers; ++i) {
        std::string email = "user" + std::to_string(i) + "@mail.example";
        std::string bank = kBanks[rng() % 4];
        std::string country;
        std::string level;
        if (i % 2 == 0) {
            country = "DE";
            level = "premium";
        } else {
            if (rng() % 5 == 0) {
                country = "DE";
                level = "standard";
            } else {
                country = kOtherCountries[rng() % 4];
                level = (rng() % 2 == 0) ? "premium" : "standard";
            }
        }
        data.customers.rows.push_back({Value::text(std::move(email)), Value::text(std::move(bank)),
                                       Value::text(std::move(country)),
                                       Value::text(std::move(level))});
    }

    // Affected customers: even ordinals spread across the id range.
    std::size_t premium_slots = (cfg.n_customers + 1) / 2;
    std::vector<bool> is_affected(cfg.n_customers, false);
    for (std::size_t j = 0; j < cfg.affected_customers; ++j) {
        std::size_t slot = j * premium_slots / cfg.affected_customers;
        std::size_t ordinal = 2 * slot;
        data.affected_customer_rows.push_back(ordinal);
        is_affected[ordinal] = true;
    }

    for (std::size_t j = 0; j < cfg.n_mails; ++j) {
        // The first mails go to the affected customers so each has at least
        // one; the rest pick customers uniformly.
        std::size_t customer = (j < cfg.affected_customers)
                                   ? data.affected_customer_rows[j]
                                   : rng() % cfg.n_customers;
        std::string subject = random_sentence(rng);
        if (is_affected[customer]) {
            // Make one token a leaked card number.
            std::size_t token_index = rng() % 8;
            std::size_t pos = 0;
            for (std::size_t t = 0; t < token_index; ++t) {
                pos = subject.find(' ', pos) + 1;
            }
            std::size_t end = subject.find(' ', pos);
            subject.replace(pos, (end == std::string::npos ? subject.size() : end) - pos,
                            sentinel_token(rng));
            data.affected_mail_rows.push_back(j);
        }
        const std::string& email = data.customers.rows[customer][0].as_text();
        data.mails.rows.push_back({Value::text(email), Value::text(std::move(subject)),
                                   Value::text(random_sentence(rng)),
                                   Value::integer(static_cast<std::int64_t>(rng() % 2))});
    }
    return data;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

SourceTables tables_of(const GeneratedData& data) {
    return {{"customers", data.customers}, {"mails", data.mails}};
}

/// Inputs for the full re-execution alternative: the leaked subjects are
/// cleared to empty strings (fitting rejects Null, and re-execution refits).
SourceTables redacted_for_refit(const GeneratedData& data) {
    SourceTables tables = tables_of(data);
    SourceTable& mails = tables.at("mails");
    for (std::size_t r : data.affected_mail_rows) {
        mails.rows[r][1] = Value::text("redacted");
    }
    return tables;
}

/// Inputs mirroring what apply_redaction promises: affected subjects Null.
SourceTables nulled_inputs(const GeneratedData& data) {
    SourceTables tables = tables_of(data);
    SourceTable& mails = tables.at("mails");
    for (std::size_t r : data.affected_mail_rows) {
        mails.rows[r][1] = Value::null();
    }
    return tables;
}

std::filesystem::path fresh_temp_dir(std::mt19937_64& rng) {
    std::filesystem::path base = std::filesystem::temp_directory_path();
    for (int attempt = 0; attempt < 16; ++attempt) {
        std::filesystem::path dir = base / ("provpipe-bench-" + std::to_string(rng()));
        std::error_code ec;
        if (std::filesystem::create_directory(dir, ec)) return dir;
    }
    throw IoError("cannot create temporary directory under " + base.string());
}

std::string format_seconds(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace

std::vector<TimingRecord> run_bench(const BenchConfig& cfg) {
    if (cfg.sizes.empty()) {
        throw ValidationError("no sizes given");
    }
    if (!std::is_sorted(cfg.sizes.begin(), cfg.sizes.end())) {
        throw ValidationError("sizes must be ascending");
    }
    if (cfg.trials < 1) {
        throw ValidationError("trials must be >= 1");
    }

    PipelineDef pipeline = complaints_pipeline();
    UnlearnConfig unlearn{cfg.tau};
    std::mt19937_64 tmp_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

    std::vector<TimingRecord> records;
    for (std::size_t size : cfg.sizes) {
        GeneratedData data =
            generate_data(GenConfig::for_mails(size, cfg.seed, cfg.affected_customers));
        SourceTables tables = tables_of(data);
        SourceTables refit_tables = redacted_for_refit(data);
        RedactionRequest request{"mails", data.affected_mail_rows, "mail_subject"};

        ArtifactBundle bundle = capture(pipeline, tables);
        std::filesystem::path dir = fresh_temp_dir(tmp_rng);
        save_bundle(bundle, dir, /*overwrite=*/true);

        // Correctness gates the timings: the incrementally updated bundle
        // must match full re-execution with the fitted encoders reused.
        {
            ArtifactBundle loaded = load_bundle(dir);
            MaintenancePlan plan = plan_redaction(loaded, request);
            MaintenanceOutcome outcome = apply_redaction(loaded, plan, unlearn);
            OracleResult oracle =
                oracle_reexecute(pipeline, nulled_inputs(data), loaded.fitted);
            if (!(outcome.bundle.prepared == oracle.prepared)) {
                throw ValidationError("IVM/re-execution mismatch in prepared data at size " +
                                      std::to_string(size));
            }
            if (max_abs_diff(outcome.bundle.features, oracle.features) > 1e-9) {
                throw ValidationError("IVM/re-execution mismatch in features at size " +
                                      std::to_string(size));
            }
            if (outcome.bundle.labels != oracle.labels) {
                throw ValidationError("IVM/re-execution mismatch in labels at size " +
                                      std::to_string(size));
            }
        }

        TimingRecord mean{size, -1, 0, 0, 0, 0, 0};
        for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
            ArtifactBundle fresh = load_bundle(dir);

            // One untimed round so the timed one measures steady-state
            // latency rather than first-touch page and allocator costs.
            apply_redaction(fresh, plan_redaction(fresh, request), unlearn);

            Clock::time_point t0 = Clock::now();
            MaintenancePlan plan = plan_redaction(fresh, request);
            double plan_s = seconds_since(t0);

            Clock::time_point t1 = Clock::now();
            MaintenanceOutcome outcome = apply_redaction(fresh, plan, unlearn);
            double apply_s = seconds_since(t1);

            double unlearn_s = 0.0;
            for (const auto& [phase, secs] : outcome.report.elapsed_seconds) {
                if (phase == "unlearn") unlearn_s = secs;
            }

            Clock::time_point t2 = Clock::now();
            ArtifactBundle refit = capture(pipeline, refit_tables);
            double full_s = seconds_since(t2);
            (void)refit;

            TimingRecord rec{size,
                             static_cast<long long>(trial),
                             full_s,
                             plan_s + apply_s,
                             plan_s,
                             apply_s,
                             unlearn_s};
            mean.t_full_s += full_s;
            mean.t_ivm_s += rec.t_ivm_s;
            mean.phase_plan_s += plan_s;
            mean.phase_apply_s += apply_s;
            mean.phase_unlearn_s += unlearn_s;
            records.push_back(rec);
        }
        double inv = 1.0 / static_cast<double>(cfg.trials);
        mean.t_full_s *= inv;
        mean.t_ivm_s *= inv;
        mean.phase_plan_s *= inv;
        mean.phase_apply_s *= inv;
        mean.phase_unlearn_s *= inv;
        records.push_back(mean);

        std::error_code ec;
        std::filesystem::remove_all(dir, ec);
    }
    return records;
}

std::string timings_to_csv(const std::vector<TimingRecord>& records) {
    std::string out = "n_mails,trial,t_full_s,t_ivm_s,phase_plan_s,phase_apply_s,phase_unlearn_s\n";
    for (const TimingRecord& r : records) {
        out += std::to_string(r.n_mails);
        out += ',';
        out += std::to_string(r.trial);
        out += ',';
        out += format_seconds(r.t_full_s);
        out += ',';
        out += format_seconds(r.t_ivm_s);
        out += ',';
        out += format_seconds(r.phase_plan_s);
        out += ',';
        out += format_seconds(r.phase_apply_s);
        out += ',';
        out += format_seconds(r.phase_unlearn_s);
        out += '\n';
    }
    return out;
}

std::string table_to_delimited(const SourceTable& table, char delimiter) {
    std::string out;
    for (std::size_t c = 0; c < table.schema.size(); ++c) {
        if (c > 0) out += delimiter;
        out += table.schema[c].name;
    }
    out += '\n';
    for (const Row& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c > 0) out += delimiter;
            out += format_cell(row[c], delimiter);
        }
        out += '\n';
    }
    return out;
}

}  // namespace provpipe
