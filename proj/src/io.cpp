// Copyright curldrift contributors
// SPDX-License-Identifier: Apache-2.0
#include "curldrift/io.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "curldrift/error.hpp"

namespace curldrift
{

std::string format_number(double value)
{
    if (std::isnan(value))
        return "nan";
    if (std::isinf(value))
        return value > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

CsvWriter::CsvWriter(std::filesystem::path const& path, std::vector<std::string> header)
    : file_(path, std::ios::binary | std::ios::trunc), out_(&file_), columns_(header.size())
{
    if (!file_)
        throw Error("cannot open " + path.string() + " for writing");
    write_header(header);
}

CsvWriter::CsvWriter(std::ostream& out, std::vector<std::string> header)
    : out_(&out), columns_(header.size())
{
    write_header(header);
}

void CsvWriter::write_header(std::vector<std::string> const& header)
{
    bool first = true;
    for (auto const& h : header)
        write_cell(h, first);
    *out_ << '\n';
}

void CsvWriter::throw_width(std::size_t got) const
{
    throw Error("csv row has " + std::to_string(got) + " cells, header has "
                + std::to_string(columns_));
}

void CsvWriter::write_text(std::string_view text)
{
    if (text.find_first_of(",\"\n") == std::string_view::npos)
    {
        *out_ << text;
        return;
    }
    *out_ << '"';
    for (char c : text)
    {
        if (c == '"')
            *out_ << '"';
        *out_ << c;
    }
    *out_ << '"';
}

CsvTable read_csv(std::filesystem::path const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open " + path.string());
    auto split = [](std::string const& line) {
        std::vector<std::string> cells;
        std::string cell;
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i)
        {
            char const c = line[i];
            if (quoted)
            {
                if (c == '"' && i + 1 < line.size() && line[i + 1] == '"')
                {
                    cell += '"';
                    ++i;
                }
                else if (c == '"')
                {
                    quoted = false;
                }
                else
                {
                    cell += c;
                }
            }
            else if (c == '"')
            {
                quoted = true;
            }
            else if (c == ',')
            {
                cells.push_back(cell);
                cell.clear();
            }
            else
            {
                cell += c;
            }
        }
        cells.push_back(cell);
        return cells;
    };

    CsvTable table;
    std::string line;
    if (std::getline(in, line))
        table.header = split(line);
    while (std::getline(in, line))
        table.rows.push_back(split(line));
    return table;
}

void write_json(std::filesystem::path const& path, nlohmann::ordered_json const& value)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error("cannot open " + path.string() + " for writing");
    out << value.dump(2) << '\n';
}

}  // namespace curldrift
