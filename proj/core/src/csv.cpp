#include "genset/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "genset/errors.hpp"

namespace genset {

std::size_t CsvTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw ValidationError("missing column: " + name);
}

std::vector<double> CsvTable::column(const std::string& name) const {
    const auto j = column_index(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[j]);
    return out;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t");
    auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

double parse_double(const std::string& field, std::size_t line_no) {
    const std::string f = trim(field);
    double v = 0.0;
    const char* first = f.data();
    const char* last = f.data() + f.size();
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || p != last) {
        std::ostringstream msg;
        msg << "line " << line_no << ": not a number: '" << field << "'";
        throw ValidationError(msg.str());
    }
    return v;
}

} // namespace

CsvTable read_csv_text(const std::string& text) {
    CsvTable table;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_fields(line);
        if (!have_header) {
            for (auto& f : fields) f = trim(f);
            table.header = fields;
            have_header = true;
            continue;
        }
        if (fields.size() != table.header.size()) {
            std::ostringstream msg;
            msg << "line " << line_no << ": expected " << table.header.size()
                << " fields, got " << fields.size();
            throw ValidationError(msg.str());
        }
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields) row.push_back(parse_double(f, line_no));
        table.rows.push_back(std::move(row));
    }
    if (!have_header) throw ValidationError("CSV has no header row");
    return table;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return read_csv_text(buf.str());
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

std::string to_csv_text(const CsvTable& table) {
    std::ostringstream out;
    out.precision(17);
    for (std::size_t i = 0; i < table.header.size(); ++i)
        out << (i ? "," : "") << table.header[i];
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << row[i];
        out << '\n';
    }
    return out.str();
}

void write_csv(const std::string& path, const CsvTable& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open file for writing: " + path);
    out << to_csv_text(table);
    if (!out) throw ValidationError("write failed: " + path);
}

TimeSeries time_series_from_csv(const CsvTable& table) {
    if (table.header.empty()) throw ValidationError("CSV has no columns");
    if (table.rows.size() < 2) throw ValidationError("need at least two rows of samples");
    const auto t = table.column(table.header[0]);
    const double dt = t[1] - t[0];
    if (!(dt > 0)) throw ValidationError("time column must be strictly increasing");
    for (std::size_t i = 1; i + 1 < t.size(); ++i) {
        const double d = t[i + 1] - t[i];
        if (!(d > 0)) throw ValidationError("time column must be strictly increasing");
        if (std::abs(d - dt) > 1e-6 * dt)
            throw ValidationError("time column must be uniform to within 1 ppm");
    }
    TimeSeries series(t.front(), dt);
    for (std::size_t j = 1; j < table.header.size(); ++j)
        series.add_channel(table.header[j], table.column(table.header[j]));
    return series;
}

CsvTable time_series_to_csv(const TimeSeries& series, const std::string& time_name) {
    CsvTable table;
    table.header.push_back(time_name);
    for (const auto& name : series.channel_names()) table.header.push_back(name);
    table.rows.reserve(series.length());
    for (std::size_t i = 0; i < series.length(); ++i) {
        std::vector<double> row;
        row.reserve(table.header.size());
        row.push_back(series.time_at(i));
        for (const auto& name : series.channel_names()) row.push_back(series.channel(name)[i]);
        table.rows.push_back(std::move(row));
    }
    return table;
}

} // namespace genset
