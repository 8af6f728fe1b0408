// provpipe CLI: capture pipelines, apply maintenance to captured bundles,
// run the synthetic benchmark, and drive prompt-based code rewrites.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "provpipe/bench.hpp"
#include "provpipe/csv.hpp"
#include "provpipe/errors.hpp"
#include "provpipe/ivm.hpp"
#include "provpipe/pipeline.hpp"
#include "provpipe/rewrite.hpp"
#include "provpipe/store.hpp"

namespace {

using namespace provpipe;

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write file: " + path);
    }
    out << content;
}

std::vector<std::size_t> read_row_ordinals(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open row list: " + path);
    }
    std::vector<std::size_t> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        try {
            rows.push_back(std::stoull(line));
        } catch (const std::exception&) {
            throw ValidationError("invalid row ordinal in " + path + ": '" + line + "'");
        }
    }
    return rows;
}

SourceTables load_fixture_tables(const std::string& customers_path,
                                 const std::string& mails_path) {
    SourceRegistry registry;
    ProvDataFrame customers = read_delimited(registry, customers_path, "customers", ',', true,
                                             complaints_customers_schema());
    ProvDataFrame mails =
        read_delimited(registry, mails_path, "mails", ',', true, complaints_mails_schema());
    auto to_table = [](const ProvDataFrame& frame) {
        SourceTable table;
        table.schema = frame.schema();
        table.rows.reserve(frame.n_rows());
        for (std::size_t i = 0; i < frame.n_rows(); ++i) {
            table.rows.push_back(frame.row(i));
        }
        return table;
    };
    return {{"customers", to_table(customers)}, {"mails", to_table(mails)}};
}

void emit_report(const MaintenanceReport& report, const std::string& report_path) {
    std::string line = report_json_line(report) + "\n";
    if (report_path.empty()) {
        std::cout << line;
    } else {
        write_text_file(report_path, line);
    }
}

int run(int argc, char** argv) {
    CLI::App app{"Provenance-tracked ML pipeline capture and incremental maintenance"};
    app.require_subcommand(1);

    // --- pipeline ---
    CLI::App* pipeline_cmd = app.add_subcommand("pipeline", "Capture and maintain bundles");
    pipeline_cmd->require_subcommand(1);

    std::string customers_path, mails_path, out_dir;
    CLI::App* cap = pipeline_cmd->add_subcommand("capture", "Run the pipeline, save artifacts");
    cap->add_option("--customers", customers_path, "customers CSV")->required();
    cap->add_option("--mails", mails_path, "mails CSV")->required();
    cap->add_option("--out", out_dir, "output bundle directory")->required();

    std::string bundle_dir, source_name, rows_path, column_name, report_path;
    double tau = 1e-3;
    CLI::App* redact = pipeline_cmd->add_subcommand("redact", "Redact an input column");
    redact->add_option("--bundle", bundle_dir, "bundle directory")->required();
    redact->add_option("--source", source_name, "input source name")->required();
    redact->add_option("--rows", rows_path, "file with one row ordinal per line")->required();
    redact->add_option("--column", column_name, "input column to redact")->required();
    redact->add_option("--tau", tau, "unlearning rate")->required();
    redact->add_option("--out", out_dir, "output bundle directory")->required();
    redact->add_option("--report", report_path, "write the report JSON here (default stdout)");

    std::string del_bundle_dir, del_source, del_rows_path, del_out_dir;
    double del_tau = 1e-3;
    CLI::App* del = pipeline_cmd->add_subcommand("delete", "Delete input rows");
    del->add_option("--bundle", del_bundle_dir, "bundle directory")->required();
    del->add_option("--source", del_source, "input source name")->required();
    del->add_option("--rows", del_rows_path, "file with one row ordinal per line")->required();
    del->add_option("--tau", del_tau, "unlearning rate")->required();
    del->add_option("--out", del_out_dir, "output bundle directory")->required();

    // --- bench ---
    CLI::App* bench_cmd = app.add_subcommand("bench", "Synthetic data and timing runs");
    bench_cmd->require_subcommand(1);

    std::string sizes_arg = "1000,5000,20000";
    std::size_t trials = 7, bench_affected = 5;
    std::uint64_t bench_seed = 42;
    double bench_tau = 1e-3;
    std::string bench_out;
    CLI::App* bench_run = bench_cmd->add_subcommand("run", "Measure IVM vs re-execution");
    bench_run->add_option("--sizes", sizes_arg, "comma-separated mail counts");
    bench_run->add_option("--trials", trials, "trials per size");
    bench_run->add_option("--affected", bench_affected, "affected customers");
    bench_run->add_option("--seed", bench_seed, "generator seed");
    bench_run->add_option("--tau", bench_tau, "unlearning rate");
    bench_run->add_option("--out", bench_out, "timings CSV path")->required();

    std::size_t gen_mails = 0, gen_customers = 0, gen_affected = 5;
    std::uint64_t gen_seed = 42;
    std::string gen_out;
    CLI::App* bench_gen = bench_cmd->add_subcommand("generate", "Write synthetic input tables");
    bench_gen->add_option("--mails", gen_mails, "mail count")->required();
    bench_gen->add_option("--customers", gen_customers, "customer count (default mails/10)");
    bench_gen->add_option("--affected", gen_affected, "affected customers");
    bench_gen->add_option("--seed", gen_seed, "generator seed");
    bench_gen->add_option("--out", gen_out, "output directory")->required();

    // --- rewrite ---
    std::string template_name, code_path, columns_arg, cassette_dir, record_dir;
    CLI::App* rewrite_cmd = app.add_subcommand("rewrite", "Render a rewrite prompt and query a transport");
    rewrite_cmd->add_option("--template", template_name, "dataprep or encoding")->required();
    rewrite_cmd->add_option("--code", code_path, "file with the code to rewrite")->required();
    rewrite_cmd->add_option("--columns", columns_arg, "comma-separated output columns (dataprep)");
    rewrite_cmd->add_option("--cassette", cassette_dir, "replay cassette directory (offline)");
    rewrite_cmd->add_option("--record", record_dir, "record prompt/response pairs here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;  // bad arguments are validation errors
    }

    if (cap->parsed()) {
        SourceTables tables = load_fixture_tables(customers_path, mails_path);
        ArtifactBundle bundle = capture(complaints_pipeline(), tables);
        SaveSummary summary = save_bundle(bundle, out_dir);
        std::cout << "captured " << bundle.prepared.n_rows() << " rows, "
                  << bundle.features.n_dims() << " feature dims; wrote " << summary.files_written
                  << " files (" << summary.bytes_written << " bytes) to " << out_dir << "\n";
        return 0;
    }
    if (redact->parsed()) {
        ArtifactBundle bundle = load_bundle(bundle_dir);
        RedactionRequest request{source_name, read_row_ordinals(rows_path), column_name};
        MaintenancePlan plan = plan_redaction(bundle, request);
        MaintenanceOutcome outcome = apply_redaction(bundle, plan, UnlearnConfig{tau});
        save_bundle(outcome.bundle, out_dir);
        emit_report(outcome.report, report_path);
        return 0;
    }
    if (del->parsed()) {
        ArtifactBundle bundle = load_bundle(del_bundle_dir);
        DeletionRequest request{del_source, read_row_ordinals(del_rows_path)};
        MaintenanceOutcome outcome = apply_deletion(bundle, request, UnlearnConfig{del_tau});
        save_bundle(outcome.bundle, del_out_dir);
        emit_report(outcome.report, "");
        return 0;
    }
    if (bench_run->parsed()) {
        BenchConfig cfg;
        cfg.sizes.clear();
        for (const std::string& field : split_fields(sizes_arg, ',')) {
            cfg.sizes.push_back(std::stoull(field));
        }
        cfg.trials = trials;
        cfg.affected_customers = bench_affected;
        cfg.seed = bench_seed;
        cfg.tau = bench_tau;
        std::vector<TimingRecord> records = run_bench(cfg);
        write_text_file(bench_out, timings_to_csv(records));
        std::cout << "wrote " << records.size() << " timing rows to " << bench_out << "\n";
        return 0;
    }
    if (bench_gen->parsed()) {
        GenConfig cfg;
        cfg.n_mails = gen_mails;
        cfg.n_customers = (gen_customers > 0) ? gen_customers
                                              : std::max<std::size_t>(1, gen_mails / 10);
        cfg.seed = gen_seed;
        cfg.affected_customers = gen_affected;
        GeneratedData data = generate_data(cfg);
        std::filesystem::create_directories(gen_out);
        write_text_file(gen_out + "/customers.csv", table_to_delimited(data.customers, ','));
        write_text_file(gen_out + "/mails.csv", table_to_delimited(data.mails, ','));
        std::string rows;
        for (std::size_t r : data.affected_mail_rows) {
            rows += std::to_string(r);
            rows += '\n';
        }
        write_text_file(gen_out + "/affected_rows.txt", rows);
        std::cout << "wrote " << data.customers.rows.size() << " customers, "
                  << data.mails.rows.size() << " mails (" << data.affected_mail_rows.size()
                  << " affected) to " << gen_out << "\n";
        return 0;
    }
    if (rewrite_cmd->parsed()) {
        TemplateId id = template_id_from_string(template_name);
        std::string code = read_text_file(code_path);
        std::optional<std::vector<std::string>> columns;
        if (!columns_arg.empty()) {
            columns = split_fields(columns_arg, ',');
        }
        std::optional<std::filesystem::path> record;
        if (!record_dir.empty()) record = record_dir;

        std::string completion;
        if (!cassette_dir.empty()) {
            ReplayTransport transport{cassette_dir};
            completion = request_rewrite(id, code, columns, transport, record);
        } else {
            HttpTransport transport = HttpTransport::from_environment();
            completion = request_rewrite(id, code, columns, transport, record);
        }
        std::cout << completion;
        return 0;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
