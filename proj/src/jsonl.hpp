#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>

#include <json.hpp>

#include "oadr/error.hpp"

namespace oadr::detail {

using json = nlohmann::ordered_json;

// Calls `fn(record, line_number)` for every non-blank line. Parse failures and
// exceptions thrown by `fn` are rethrown with the 1-based line number.
inline void for_each_jsonl(const std::filesystem::path& path,
                           const std::function<void(const json&, std::size_t)>& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json record;
        try {
            record = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": malformed record: " + e.what());
        }
        try {
            fn(record, line_no);
        } catch (const json::exception& e) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": malformed record: " + e.what());
        } catch (const DataError& e) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

class JsonlWriter {
public:
    explicit JsonlWriter(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary) {
        if (!out_) throw Error("cannot open " + path.string() + " for writing");
    }

    void write(const json& record) {
        out_ << record.dump() << '\n';
        if (!out_) throw Error("write failed: " + path_.string());
    }

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

}  // namespace oadr::detail
