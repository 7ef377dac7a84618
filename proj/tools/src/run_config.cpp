#include "run_config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "diarylens/util.hpp"

namespace diarylens::cli {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <typename T>
T parse_number(const std::string& value, const std::string& key) {
    std::stringstream ss(value);
    T out{};
    ss >> out;
    if (ss.fail() || !ss.eof()) {
        throw std::invalid_argument("config key '" + key + "': bad number '" + value + "'");
    }
    return out;
}

bool parse_bool(const std::string& value, const std::string& key) {
    const std::string v = to_lower(value);
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw std::invalid_argument("config key '" + key + "': bad boolean '" + value + "'");
}

void apply(RunConfig& config, const std::string& key, const std::string& value) {
    if (key == "corpus") config.corpus_path = value;
    else if (key == "out") config.out_dir = value;
    else if (key == "seed") config.seed = parse_number<std::uint64_t>(value, key);
    else if (key == "folds") config.folds = parse_number<int>(value, key);
    else if (key == "serial") config.serial = parse_bool(value, key);
    else if (key == "provider") config.provider = value;
    else if (key == "provider.dim") config.provider_dim = parse_number<int>(value, key);
    else if (key == "provider.model") config.provider_model = value;
    else if (key == "provider.endpoint") config.provider_endpoint = value;
    else if (key == "provider.api_key_env") config.provider_api_key_env = value;
    else if (key == "provider.seed") config.provider_seed = parse_number<std::uint64_t>(value, key);
    else if (key == "llm.endpoint") config.llm_endpoint = value;
    else if (key == "llm.model") config.llm_model = value;
    else if (key == "llm.temperature") config.llm_temperature = parse_number<double>(value, key);
    else if (key == "llm.max_tokens") config.llm_max_tokens = parse_number<int>(value, key);
    else if (key == "llm.max_retries") config.llm_max_retries = parse_number<int>(value, key);
    else if (key == "llm.max_in_flight") config.llm_max_in_flight = parse_number<int>(value, key);
    else if (key == "llm.api_key_env") config.llm_api_key_env = value;
    else if (key == "mock") config.mock = value;
    else if (key == "grid.history") config.grid_history = split_list(value);
    else if (key == "grid.k") {
        config.grid_k.clear();
        for (const auto& item : split_list(value)) {
            config.grid_k.push_back(parse_number<int>(item, key));
        }
    } else if (key == "baselines") config.baselines = split_list(value);
    else if (key == "analyses") config.analyses = split_list(value);
    else if (key == "cache") config.cache_path = value;
    else throw std::invalid_argument("unknown config key '" + key + "'");
}

std::string join_list(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& item : items) {
        if (!out.empty()) out += ",";
        out += item;
    }
    return out;
}

std::string join_ints(const std::vector<int>& items) {
    std::string out;
    for (int item : items) {
        if (!out.empty()) out += ",";
        out += std::to_string(item);
    }
    return out;
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
    RunConfig config;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            apply(config, key, value);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": " +
                                        e.what());
        }
    }
    return config;
}

std::string describe_run(const RunConfig& config, const std::string& command,
                         const std::string& code_version) {
    std::string out;
    out += "# command: " + command + "\n";
    out += "# template_version: " + std::string(kTemplateVersion) + "\n";
    out += "# code_version: " + code_version + "\n";
    out += "corpus = " + config.corpus_path + "\n";
    out += "out = " + config.out_dir + "\n";
    out += "seed = " + std::to_string(config.seed) + "\n";
    out += "folds = " + std::to_string(config.folds) + "\n";
    out += std::string("serial = ") + (config.serial ? "true" : "false") + "\n";
    out += "provider = " + config.provider + "\n";
    out += "provider.dim = " + std::to_string(config.provider_dim) + "\n";
    out += "provider.model = " + config.provider_model + "\n";
    out += "provider.endpoint = " + config.provider_endpoint + "\n";
    out += "provider.api_key_env = " + config.provider_api_key_env + "\n";
    out += "provider.seed = " + std::to_string(config.provider_seed) + "\n";
    out += "llm.endpoint = " + config.llm_endpoint + "\n";
    out += "llm.model = " + config.llm_model + "\n";
    out += "llm.temperature = " + format_fixed(config.llm_temperature, 2) + "\n";
    out += "llm.max_tokens = " + std::to_string(config.llm_max_tokens) + "\n";
    out += "llm.max_retries = " + std::to_string(config.llm_max_retries) + "\n";
    out += "llm.max_in_flight = " + std::to_string(config.llm_max_in_flight) + "\n";
    out += "llm.api_key_env = " + config.llm_api_key_env + "\n";
    out += "mock = " + config.mock + "\n";
    out += "grid.history = " + join_list(config.grid_history) + "\n";
    out += "grid.k = " + join_ints(config.grid_k) + "\n";
    out += "baselines = " + join_list(config.baselines) + "\n";
    out += "analyses = " + join_list(config.analyses) + "\n";
    out += "cache = " + config.cache_path + "\n";
    return out;
}

HistoryMode parse_history_token(const std::string& token) {
    std::string v = to_lower(token);
    v.erase(std::remove(v.begin(), v.end(), '_'), v.end());
    if (v == "none") return HistoryMode::None;
    if (v == "currentday") return HistoryMode::CurrentDay;
    if (v == "lastday") return HistoryMode::LastDay;
    throw std::invalid_argument("unknown history mode '" + token +
                                "' (expected none, current_day or last_day)");
}

std::string history_token(HistoryMode mode) {
    switch (mode) {
        case HistoryMode::None: return "none";
        case HistoryMode::CurrentDay: return "current_day";
        case HistoryMode::LastDay: return "last_day";
    }
    throw std::invalid_argument("bad history mode");
}

ProviderConfig provider_config(const RunConfig& config) {
    ProviderConfig out;
    out.provider = config.provider;
    out.dim = config.provider_dim;
    out.model_name = config.provider_model;
    out.endpoint_url = config.provider_endpoint;
    out.api_key_env_var = config.provider_api_key_env;
    out.seed = config.provider_seed;
    return out;
}

std::shared_ptr<EmbeddingProvider> make_run_provider(
    const RunConfig& config, std::shared_ptr<CachingEmbedder>* cache_out) {
    std::shared_ptr<EmbeddingProvider> inner = make_provider(provider_config(config));
    auto cache = config.cache_path.empty()
                     ? std::make_shared<EmbeddingCache>()
                     : std::make_shared<EmbeddingCache>(config.cache_path);
    auto caching = std::make_shared<CachingEmbedder>(std::move(inner), std::move(cache));
    if (cache_out != nullptr) *cache_out = caching;
    return caching;
}

std::shared_ptr<ResponseSource> make_run_source(
    const RunConfig& config, const std::map<std::string, LabelSet>* labels) {
    if (config.mock.empty()) {
        LlmConfig llm;
        llm.endpoint_url = config.llm_endpoint;
        llm.model_name = config.llm_model;
        llm.temperature = config.llm_temperature;
        llm.max_tokens = config.llm_max_tokens;
        llm.max_retries = config.llm_max_retries;
        llm.max_in_flight = config.llm_max_in_flight;
        llm.api_key_env_var = config.llm_api_key_env;
        auto transport = std::make_shared<HttpChatTransport>(llm);
        auto client = std::make_shared<ChatClient>(llm, std::move(transport));
        return std::make_shared<ChatResponseSource>(std::move(client));
    }
    return std::shared_ptr<ResponseSource>(
        make_mock_source(config.mock, labels, config.seed));
}

}  // namespace diarylens::cli
