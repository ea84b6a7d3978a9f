#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "psd/errors.hpp"
#include "psd/util.hpp"

namespace psd {

// ---------------------------------------------------------------------------
// Flat key-value configuration with [sections]; '#' starts a comment. Keys
// keep file order within a section for canonical (diff-able) writing.
// ---------------------------------------------------------------------------

class IniDocument {
public:
    struct Section {
        std::string name;
        std::vector<std::pair<std::string, std::string>> entries;
    };

    static IniDocument parse(std::istream& is) {
        IniDocument doc;
        std::string line;
        std::string current;
        int lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            const std::string t = trim(strip_comment(line));
            if (t.empty()) continue;
            if (t.front() == '[') {
                if (t.back() != ']')
                    throw ConfigError("ini: malformed section at line " +
                                      std::to_string(lineno));
                current = trim(t.substr(1, t.size() - 2));
                doc.section(current);
                continue;
            }
            const auto eq = t.find('=');
            if (eq == std::string::npos)
                throw ConfigError("ini: expected key = value at line " +
                                  std::to_string(lineno));
            doc.set(current, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
        }
        return doc;
    }

    static IniDocument parse_string(const std::string& text) {
        std::istringstream is(text);
        return parse(is);
    }

    static IniDocument parse_file(const std::string& path) {
        std::ifstream is(path);
        if (!is) throw ConfigError("ini: cannot open " + path);
        return parse(is);
    }

    Section& section(const std::string& name) {
        for (auto& s : sections_)
            if (s.name == name) return s;
        sections_.push_back({name, {}});
        return sections_.back();
    }

    const Section* find_section(const std::string& name) const {
        for (const auto& s : sections_)
            if (s.name == name) return &s;
        return nullptr;
    }

    bool has(const std::string& sec, const std::string& key) const {
        const Section* s = find_section(sec);
        if (!s) return false;
        for (const auto& [k, v] : s->entries)
            if (k == key) return true;
        return false;
    }

    void set(const std::string& sec, const std::string& key, const std::string& value) {
        Section& s = section(sec);
        for (auto& [k, v] : s.entries)
            if (k == key) {
                v = value;
                return;
            }
        s.entries.emplace_back(key, value);
    }

    std::string get(const std::string& sec, const std::string& key) const {
        const Section* s = find_section(sec);
        if (s)
            for (const auto& [k, v] : s->entries)
                if (k == key) return v;
        throw ConfigError("ini: missing key [" + sec + "] " + key);
    }

    std::string get_or(const std::string& sec, const std::string& key,
                       const std::string& dflt) const {
        return has(sec, key) ? get(sec, key) : dflt;
    }

    double get_double(const std::string& sec, const std::string& key) const {
        return to_double(sec, key, get(sec, key));
    }

    double get_double_or(const std::string& sec, const std::string& key,
                         double dflt) const {
        return has(sec, key) ? get_double(sec, key) : dflt;
    }

    long long get_int_or(const std::string& sec, const std::string& key,
                         long long dflt) const {
        if (!has(sec, key)) return dflt;
        const std::string v = get(sec, key);
        std::size_t pos = 0;
        const long long out = std::stoll(v, &pos);
        if (pos != v.size())
            throw ConfigError("ini: [" + sec + "] " + key + " is not an integer");
        return out;
    }

    bool get_bool_or(const std::string& sec, const std::string& key, bool dflt) const {
        if (!has(sec, key)) return dflt;
        const std::string v = get(sec, key);
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw ConfigError("ini: [" + sec + "] " + key + " is not a boolean");
    }

    std::vector<double> get_doubles(const std::string& sec, const std::string& key) const {
        std::istringstream is(get(sec, key));
        std::vector<double> out;
        std::string tok;
        while (is >> tok) out.push_back(to_double(sec, key, tok));
        return out;
    }

    const std::vector<Section>& sections() const { return sections_; }

    /// Canonical text form (stable ordering: as inserted).
    std::string dump() const {
        std::string out;
        for (const auto& s : sections_) {
            if (!s.name.empty()) out += "[" + s.name + "]\n";
            for (const auto& [k, v] : s.entries) out += k + " = " + v + "\n";
            out += "\n";
        }
        return out;
    }

    void write_file(const std::string& path) const {
        std::ofstream os(path);
        if (!os) throw ConfigError("ini: cannot write " + path);
        os << dump();
    }

    std::uint64_t hash() const { return fnv1a64(dump()); }

private:
    static std::string strip_comment(const std::string& line) {
        const auto pos = line.find('#');
        return pos == std::string::npos ? line : line.substr(0, pos);
    }

    static std::string trim(const std::string& s) {
        const auto a = s.find_first_not_of(" \t\r\n");
        if (a == std::string::npos) return "";
        const auto b = s.find_last_not_of(" \t\r\n");
        return s.substr(a, b - a + 1);
    }

    static double to_double(const std::string& sec, const std::string& key,
                            const std::string& v) {
        std::size_t pos = 0;
        double out = 0.0;
        try {
            out = std::stod(v, &pos);
        } catch (const std::exception&) {
            throw ConfigError("ini: [" + sec + "] " + key + " is not a number");
        }
        if (pos != v.size())
            throw ConfigError("ini: [" + sec + "] " + key + " is not a number");
        return out;
    }

    std::vector<Section> sections_;
};

}  // namespace psd
