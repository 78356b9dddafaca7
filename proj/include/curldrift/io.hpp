// Copyright curldrift contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <json.hpp>

namespace curldrift
{

//! Shortest-independent decimal text with 17 significant digits
std::string format_number(double value);

/*!
 * Row-at-a-time CSV output with a fixed header.
 *
 * Rows go straight to the stream; nothing beyond the current row is kept.
 */
class CsvWriter
{
  public:
    CsvWriter(std::filesystem::path const& path, std::vector<std::string> header);
    CsvWriter(std::ostream& out, std::vector<std::string> header);

    CsvWriter(CsvWriter const&) = delete;
    CsvWriter& operator=(CsvWriter const&) = delete;

    template<class... Ts>
    void row(Ts const&... values)
    {
        if (sizeof...(Ts) != columns_)
            throw_width(sizeof...(Ts));
        bool first = true;
        ((write_cell(values, first)), ...);
        *out_ << '\n';
        ++rows_;
    }

    std::size_t rows() const { return rows_; }
    void flush() { out_->flush(); }

  private:
    std::ofstream file_;
    std::ostream* out_;
    std::size_t columns_;
    std::size_t rows_ = 0;

    void write_header(std::vector<std::string> const& header);
    [[noreturn]] void throw_width(std::size_t got) const;

    template<class T>
    void write_cell(T const& v, bool& first)
    {
        if (!first)
            *out_ << ',';
        first = false;
        if constexpr (std::is_same_v<T, bool>)
            *out_ << (v ? 1 : 0);
        else if constexpr (std::is_floating_point_v<T>)
            *out_ << format_number(static_cast<double>(v));
        else if constexpr (std::is_integral_v<T>)
            *out_ << v;
        else
            write_text(std::string_view(v));
    }
    void write_text(std::string_view text);
};

//! Parsed CSV: header plus rows of raw cell text
struct CsvTable
{
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(std::filesystem::path const& path);

//! Pretty-printed JSON followed by a newline
void write_json(std::filesystem::path const& path, nlohmann::ordered_json const& value);

}  // namespace curldrift
