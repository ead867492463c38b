#include "asl/csv.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>

namespace asl {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

std::string format_number(double value) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::runtime_error("format_number: conversion failed");
  return std::string(buf, end);
}

std::string format_number(const std::optional<double>& value) { return value ? format_number(*value) : std::string(); }

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != columns_.size()) throw std::invalid_argument("CsvTable: row width does not match header");
  rows_.push_back(std::move(cells));
}

std::vector<std::string> CsvTable::column(const std::string& name) const {
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    if (columns_[c] != name) continue;
    std::vector<std::string> cells;
    cells.reserve(rows_.size());
    for (const auto& row : rows_) cells.push_back(row[c]);
    return cells;
  }
  throw std::out_of_range("CsvTable: no column named " + name);
}

std::string CsvTable::str() const {
  std::string out;
  auto append = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  append(columns_);
  for (const auto& row : rows_) append(row);
  return out;
}

CsvTable parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("parse_csv: missing header");
  CsvTable table(split_line(line));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    table.add_row(split_line(line));
  }
  return table;
}

}  // namespace asl
