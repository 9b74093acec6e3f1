#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "asc/experiment.hpp"

namespace asc {

using nlohmann::json;

namespace {

[[noreturn]] void bad_config(const std::string& msg) {
    throw std::invalid_argument("config: " + msg);
}

// Minimal TOML reader covering the experiment schema: [section] headers
// (dotted names allowed), key = value lines with strings, numbers, booleans,
// and flat arrays.  Comments start with '#'.
json toml_to_json(const std::string& text) {
    json root = json::object();
    json* table = &root;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        // strip comment (quotes respected)
        bool in_str = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') in_str = !in_str;
            if (line[i] == '#' && !in_str) {
                line.erase(i);
                break;
            }
        }
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            if (a == std::string::npos) return std::string();
            const auto b = s.find_last_not_of(" \t\r");
            return s.substr(a, b - a + 1);
        };
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                bad_config("line " + std::to_string(lineno) + ": malformed section");
            std::string name = trim(line.substr(1, line.size() - 2));
            table = &root;
            std::size_t pos = 0;
            while (pos != std::string::npos) {
                const auto dot = name.find('.', pos);
                const std::string part =
                    name.substr(pos, dot == std::string::npos ? dot : dot - pos);
                if (part.empty())
                    bad_config("line " + std::to_string(lineno) + ": empty section name");
                table = &(*table)[part];
                if (!table->is_object()) *table = json::object();
                pos = dot == std::string::npos ? dot : dot + 1;
            }
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos)
            bad_config("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            bad_config("line " + std::to_string(lineno) + ": empty key or value");

        std::function<json(const std::string&)> parse_scalar =
            [&](const std::string& v) -> json {
            if (v.size() >= 2 && v.front() == '"' && v.back() == '"')
                return v.substr(1, v.size() - 2);
            if (v == "true") return true;
            if (v == "false") return false;
            try {
                std::size_t used = 0;
                if (v.find_first_of(".eE") == std::string::npos) {
                    const long long i = std::stoll(v, &used);
                    if (used == v.size()) return i;
                } else {
                    const double d = std::stod(v, &used);
                    if (used == v.size()) return d;
                }
            } catch (const std::exception&) {
            }
            bad_config("line " + std::to_string(lineno) + ": cannot parse value '" + v + "'");
        };

        if (value.front() == '[') {
            if (value.back() != ']')
                bad_config("line " + std::to_string(lineno) + ": unterminated array");
            json arr = json::array();
            std::string inner = value.substr(1, value.size() - 2);
            std::string item;
            std::istringstream items(inner);
            while (std::getline(items, item, ',')) {
                item = trim(item);
                if (!item.empty()) arr.push_back(parse_scalar(item));
            }
            (*table)[key] = arr;
        } else {
            (*table)[key] = parse_scalar(value);
        }
    }
    return root;
}

template <typename T>
void read_field(const json& obj, const char* key, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        bad_config(std::string("field '") + key + "' has the wrong type");
    }
}

void check_keys(const json& obj, const char* section,
                std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok)
            bad_config(std::string("unknown key '") + key + "' in [" + section + "]");
    }
}

ExperimentConfig config_from_json(const json& j) {
    if (!j.is_object()) bad_config("top level must be a table/object");
    check_keys(j, "top",
               {"input", "synth", "paths", "saf", "detector", "hangover", "experiment"});
    ExperimentConfig cfg;

    if (j.contains("input")) {
        const auto& in = j.at("input");
        check_keys(in, "input", {"source", "wav", "annotations", "duration_s"});
        read_field(in, "source", cfg.source);
        read_field(in, "wav", cfg.wav_path);
        read_field(in, "annotations", cfg.annotations_path);
        read_field(in, "duration_s", cfg.duration_s);
    }
    if (j.contains("synth")) {
        const auto& sy = j.at("synth");
        check_keys(sy, "synth",
                   {"snore_ratio", "event_amplitude", "event_min_s", "event_max_s",
                    "harmonics", "attack_s", "breath_noise_db", "breath_pole",
                    "background_db", "inspiration_hz", "expiration_hz"});
        read_field(sy, "snore_ratio", cfg.synth.snore_ratio);
        read_field(sy, "event_amplitude", cfg.synth.event_amplitude);
        read_field(sy, "event_min_s", cfg.synth.event_min_s);
        read_field(sy, "event_max_s", cfg.synth.event_max_s);
        read_field(sy, "harmonics", cfg.synth.harmonics);
        read_field(sy, "attack_s", cfg.synth.attack_s);
        read_field(sy, "breath_noise_db", cfg.synth.breath_noise_db);
        read_field(sy, "breath_pole", cfg.synth.breath_pole);
        read_field(sy, "background_db", cfg.synth.background_db);
        if (sy.contains("inspiration_hz")) {
            const auto v = sy.at("inspiration_hz").get<std::vector<double>>();
            if (v.size() != 2) bad_config("inspiration_hz must be [low, high]");
            cfg.synth.inspiration_low_hz = v[0];
            cfg.synth.inspiration_high_hz = v[1];
        }
        if (sy.contains("expiration_hz")) {
            const auto v = sy.at("expiration_hz").get<std::vector<double>>();
            if (v.size() != 2) bad_config("expiration_hz must be [low, high]");
            cfg.synth.expiration_low_hz = v[0];
            cfg.synth.expiration_high_hz = v[1];
        }
    }
    if (j.contains("paths")) {
        const auto& pa = j.at("paths");
        check_keys(pa, "paths", {"p", "s", "length"});
        read_field(pa, "p", cfg.p_path);
        read_field(pa, "s", cfg.s_path);
        read_field(pa, "length", cfg.path_length);
    }
    if (j.contains("saf")) {
        const auto& sa = j.at("saf");
        check_keys(sa, "saf",
                   {"fullband_len", "subbands", "mu", "alpha", "prototype_len"});
        read_field(sa, "fullband_len", cfg.saf.fullband_len);
        read_field(sa, "subbands", cfg.saf.subbands);
        read_field(sa, "mu", cfg.saf.mu);
        read_field(sa, "alpha", cfg.saf.alpha);
        read_field(sa, "prototype_len", cfg.prototype_len);
    }
    if (j.contains("detector")) {
        const auto& de = j.at("detector");
        check_keys(de, "detector", {"kind", "threshold", "weights"});
        std::string kind = "oracle";
        read_field(de, "kind", kind);
        if (kind == "oracle")
            cfg.detector = DetectorKind::Oracle;
        else if (kind == "energy")
            cfg.detector = DetectorKind::Energy;
        else if (kind == "crnn")
            cfg.detector = DetectorKind::Crnn;
        else
            bad_config("detector.kind must be oracle, energy, or crnn");
        read_field(de, "threshold", cfg.energy_threshold);
        read_field(de, "weights", cfg.weights_path);
    }
    if (j.contains("hangover")) {
        const auto& ha = j.at("hangover");
        check_keys(ha, "hangover", {"enabled", "x", "k"});
        read_field(ha, "enabled", cfg.hangover_enabled);
        read_field(ha, "x", cfg.hangover_x);
        read_field(ha, "k", cfg.hangover_k);
    }
    if (j.contains("experiment")) {
        const auto& ex = j.at("experiment");
        check_keys(ex, "experiment",
                   {"snr_db", "sad_mode", "seed", "outdir", "emit_traces", "parallel"});
        read_field(ex, "snr_db", cfg.snr_list_db);
        read_field(ex, "sad_mode", cfg.sad_mode);
        read_field(ex, "seed", cfg.seed);
        read_field(ex, "outdir", cfg.outdir);
        read_field(ex, "emit_traces", cfg.emit_traces);
        read_field(ex, "parallel", cfg.parallel);
    }
    return cfg;
}

}  // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    const std::string text = ss.str();

    const bool looks_json =
        (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0) ||
        (!text.empty() && text[text.find_first_not_of(" \t\r\n")] == '{');
    json j;
    if (looks_json) {
        try {
            j = json::parse(text);
        } catch (const json::exception& e) {
            bad_config(std::string("JSON parse error: ") + e.what());
        }
    } else {
        j = toml_to_json(text);
    }
    return config_from_json(j);
}

std::string config_to_canonical_json(const ExperimentConfig& cfg) {
    json j;
    j["input"] = {{"source", cfg.source},
                  {"wav", cfg.wav_path},
                  {"annotations", cfg.annotations_path},
                  {"duration_s", cfg.duration_s}};
    j["synth"] = {{"snore_ratio", cfg.synth.snore_ratio},
                  {"event_amplitude", cfg.synth.event_amplitude},
                  {"event_min_s", cfg.synth.event_min_s},
                  {"event_max_s", cfg.synth.event_max_s},
                  {"harmonics", cfg.synth.harmonics},
                  {"attack_s", cfg.synth.attack_s},
                  {"breath_noise_db", cfg.synth.breath_noise_db},
                  {"breath_pole", cfg.synth.breath_pole},
                  {"background_db", cfg.synth.background_db},
                  {"inspiration_hz",
                   {cfg.synth.inspiration_low_hz, cfg.synth.inspiration_high_hz}},
                  {"expiration_hz",
                   {cfg.synth.expiration_low_hz, cfg.synth.expiration_high_hz}}};
    j["paths"] = {{"p", cfg.p_path}, {"s", cfg.s_path}, {"length", cfg.path_length}};
    j["saf"] = {{"fullband_len", cfg.saf.fullband_len},
                {"subbands", cfg.saf.subbands},
                {"mu", cfg.saf.mu},
                {"alpha", cfg.saf.alpha},
                {"prototype_len", cfg.prototype_len}};
    j["detector"] = {{"kind", cfg.detector == DetectorKind::Oracle   ? "oracle"
                              : cfg.detector == DetectorKind::Energy ? "energy"
                                                                     : "crnn"},
                     {"threshold", cfg.energy_threshold},
                     {"weights", cfg.weights_path}};
    j["hangover"] = {{"enabled", cfg.hangover_enabled},
                     {"x", cfg.hangover_x},
                     {"k", cfg.hangover_k}};
    j["experiment"] = {{"snr_db", cfg.snr_list_db}, {"sad_mode", cfg.sad_mode},
                       {"seed", cfg.seed},          {"outdir", cfg.outdir},
                       {"emit_traces", cfg.emit_traces}, {"parallel", cfg.parallel}};
    return j.dump();
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace asc
