#include "provpipe/rewrite.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "provpipe/errors.hpp"
#include "provpipe/sha256.hpp"

namespace provpipe {

namespace {

const std::string kDataprepTemplate =
    "The following code is written in Python with for loops and manual data parsing. "
    "Please rewrite the code to use a dataframe library called lester. lester has an API "
    "similar to pandas and supports the following operations from pandas: merge, query, "
    "assign, explode, rename. The assign method in lester has two additional parameters: "
    "target_column and source_columns; target_column refers to the new column which should "
    "be created, while source_columns refers to the list of input columns that are used by "
    "the expression in assign. Please create a single, separate assign statement for each "
    "new column that is computed. Only respond with Python code. Do not iterate over "
    "dataframes. The code should contain a single function called _lester_dataprep, which "
    "returns a single dataframe called result_df as result. This final dataframe should "
    "have the following columns: {output_columns}\n"
    "\n"
    "{code}\n";

const std::string kEncodingTemplate =
    "The following Python reads a CSV file and manually encodes the data as features for a "
    "machine learning model. Please rewrite the code to use estimator/transformers from "
    "scikit-learn and the ColumnTransformer from scikit-learn. Only respond with Python "
    "code. Create a function called encode_features which returns an unfitted "
    "ColumnTransformer which contains the feature encoding logic. The encode_features "
    "function should be able to work on data that follows the exact schema of the CSV "
    "file.\n"
    "\n"
    "{code}\n";

std::string replace_once(std::string text, const std::string& placeholder,
                         const std::string& value) {
    std::size_t pos = text.find(placeholder);
    if (pos == std::string::npos) {
        throw ValidationError("template is missing placeholder " + placeholder);
    }
    text.replace(pos, placeholder.size(), value);
    return text;
}

}  // namespace

TemplateId template_id_from_string(const std::string& name) {
    if (name == "dataprep" || name == "dataprep_rewrite") return TemplateId::DataprepRewrite;
    if (name == "encoding" || name == "encoding_rewrite") return TemplateId::EncodingRewrite;
    throw ValidationError("unknown template: " + name);
}

const std::string& template_body(TemplateId id) {
    switch (id) {
        case TemplateId::DataprepRewrite: return kDataprepTemplate;
        case TemplateId::EncodingRewrite: return kEncodingTemplate;
    }
    throw ValidationError("unknown template id");
}

std::string render_prompt(TemplateId id, const std::string& code,
                          const std::optional<std::vector<std::string>>& output_columns) {
    std::string body = template_body(id);
    if (id == TemplateId::DataprepRewrite) {
        if (!output_columns) {
            throw ValidationError("dataprep template requires output_columns");
        }
        std::string joined;
        for (std::size_t i = 0; i < output_columns->size(); ++i) {
            if (i > 0) joined += ", ";
            joined += (*output_columns)[i];
        }
        body = replace_once(std::move(body), "{output_columns}", joined);
    } else if (output_columns) {
        throw ValidationError("encoding template has no {output_columns} placeholder");
    }
    return replace_once(std::move(body), "{code}", code);
}

ReplayTransport::ReplayTransport(std::filesystem::path cassette_dir)
    : dir_(std::move(cassette_dir)) {}

std::string ReplayTransport::send(const std::string& prompt) {
    std::string key = sha256_hex(prompt);
    std::filesystem::path path = dir_ / key;
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("cassette miss for prompt sha256 " + key);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) {
        throw IoError("cassette read failure: " + path.string());
    }
    return std::move(buf).str();
}

HttpTransport HttpTransport::from_environment() {
    const char* endpoint = std::getenv("PROVPIPE_LLM_ENDPOINT");
    const char* token = std::getenv("PROVPIPE_LLM_TOKEN");
    const char* model = std::getenv("PROVPIPE_LLM_MODEL");
    if (endpoint == nullptr || model == nullptr) {
        throw ValidationError(
            "live transport needs PROVPIPE_LLM_ENDPOINT and PROVPIPE_LLM_MODEL");
    }
    return HttpTransport{endpoint, token ? token : "", model};
}

HttpTransport::HttpTransport(std::string endpoint, std::string token, std::string model)
    : endpoint_(std::move(endpoint)), token_(std::move(token)), model_(std::move(model)) {}

}  // namespace provpipe

// The HTTP client pulls in cpp-httplib; kept at the end so the interface
// above stays readable.
#include <httplib.h>

namespace provpipe {

std::string HttpTransport::send(const std::string& prompt) {
    std::string host = endpoint_;
    std::string path = "/";
    std::size_t scheme = host.find("://");
    if (scheme != std::string::npos) host = host.substr(scheme + 3);
    std::size_t slash = host.find('/');
    if (slash != std::string::npos) {
        path = host.substr(slash);
        host = host.substr(0, slash);
    }

    httplib::Client client(host);
    httplib::Headers headers;
    if (!token_.empty()) {
        headers.emplace("Authorization", "Bearer " + token_);
    }
    nlohmann::json body{{"model", model_}, {"prompt", prompt}};
    httplib::Result res = client.Post(path, headers, body.dump(), "application/json");
    if (!res || res->status != 200) {
        throw IoError("completion request failed (prompt sha256 " + sha256_hex(prompt) + ")");
    }
    try {
        return nlohmann::json::parse(res->body).at("completion").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed completion response: ") + e.what());
    }
}

std::string request_rewrite(TemplateId id, const std::string& code,
                            const std::optional<std::vector<std::string>>& output_columns,
                            CompletionTransport& transport,
                            const std::optional<std::filesystem::path>& record_dir) {
    std::string prompt = render_prompt(id, code, output_columns);
    std::string completion = transport.send(prompt);
    if (record_dir) {
        std::filesystem::create_directories(*record_dir);
        std::filesystem::path path = *record_dir / sha256_hex(prompt);
        std::ofstream out(path, std::ios::binary);
        if (!out) {
            throw IoError("cannot record cassette entry: " + path.string());
        }
        out << completion;
    }
    return completion;
}

}  // namespace provpipe
