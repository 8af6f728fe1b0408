#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace provpipe {

/// The two shipped rewrite prompt templates. Bodies are opaque data payloads
/// with {code} and (dataprep only) {output_columns} placeholders, each
/// appearing exactly once.
enum class TemplateId { DataprepRewrite, EncodingRewrite };

TemplateId template_id_from_string(const std::string& name);

const std::string& template_body(TemplateId id);

/// Substitutes the placeholders (columns joined by ", "); everything else is
/// returned byte-identical to the stored template. output_columns is
/// required for the dataprep template and rejected for the encoding one.
std::string render_prompt(TemplateId id, const std::string& code,
                          const std::optional<std::vector<std::string>>& output_columns);

class CompletionTransport {
public:
    virtual ~CompletionTransport() = default;
    virtual std::string send(const std::string& prompt) = 0;
};

/// Deterministic offline transport: one file per prompt in the cassette
/// directory, filename = hex SHA-256 of the prompt bytes, contents = the
/// completion bytes. A miss reports the hash it looked for.
class ReplayTransport : public CompletionTransport {
public:
    explicit ReplayTransport(std::filesystem::path cassette_dir);
    std::string send(const std::string& prompt) override;

private:
    std::filesystem::path dir_;
};

/// Live HTTP transport configured from the environment:
///   PROVPIPE_LLM_ENDPOINT  http://host[:port][/path]
///   PROVPIPE_LLM_TOKEN     bearer token (optional)
///   PROVPIPE_LLM_MODEL     model identifier
/// Never exercised by tests.
class HttpTransport : public CompletionTransport {
public:
    static HttpTransport from_environment();
    HttpTransport(std::string endpoint, std::string token, std::string model);
    std::string send(const std::string& prompt) override;

private:
    std::string endpoint_;
    std::string token_;
    std::string model_;
};

/// Renders the prompt, sends it through the transport, and returns the
/// completion verbatim. When record_dir is set, the prompt/response pair is
/// written as a cassette entry.
std::string request_rewrite(TemplateId id, const std::string& code,
                            const std::optional<std::vector<std::string>>& output_columns,
                            CompletionTransport& transport,
                            const std::optional<std::filesystem::path>& record_dir = {});

}  // namespace provpipe
