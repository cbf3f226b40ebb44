// Copyright 2026 The Trustbox Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "trustbox/boot.hpp"

#include <fstream>
#include <sstream>

#include "trustbox/errors.hpp"

namespace trustbox::boot {

using wire::MsgReader;
using wire::MsgType;
using wire::MsgWriter;

wire::WireMessage MeasurementEvent::to_wire() const {
  return MsgWriter(MsgType::MeasurementEvent)
      .add_u8(pcr_index)
      .add_str(component_name)
      .add(component_image)
      .add(digest.span())
      .take();
}

MeasurementEvent MeasurementEvent::from_wire(const wire::WireMessage& msg) {
  MsgReader r(msg, MsgType::MeasurementEvent, 4);
  MeasurementEvent e;
  e.pcr_index = r.u8(0);
  e.component_name = r.str(1);
  e.component_image = r.field_vec(2);
  e.digest = Digest::from(r.fixed(3, 32));
  return e;
}

wire::WireMessage BootLog::to_wire() const {
  MsgWriter w(MsgType::BootLog);
  for (const auto& e : events) w.add(wire::encode(e.to_wire()));
  return w.take();
}

BootLog BootLog::from_wire(const wire::WireMessage& msg) {
  MsgReader r(msg, MsgType::BootLog, 0);
  BootLog log;
  for (size_t i = 0; i < r.size(); ++i)
    log.events.push_back(MeasurementEvent::from_wire(wire::decode(r.field(i))));
  return log;
}

std::array<Digest, tpm::kNumPcrs> BootLog::replay() const {
  std::array<Digest, tpm::kNumPcrs> bank{};
  for (const auto& e : events) {
    if (e.pcr_index >= tpm::kNumPcrs)
      raise(ErrorCode::IndexOutOfRange, "log names a bad register");
    bank[e.pcr_index] = crypto::hash2(bank[e.pcr_index].span(), e.digest.span());
  }
  return bank;
}

BootLog boot(TpmState& t, const std::vector<BootImage>& images) {
  BootLog log;
  for (const auto& img : images) {
    MeasurementEvent e;
    e.pcr_index = img.pcr_index;
    e.component_name = img.name;
    e.component_image = img.image;
    e.digest = crypto::hash(img.image);
    t.pcr_extend(e.pcr_index, e.digest);
    log.events.push_back(std::move(e));
  }
  return log;
}

std::string_view verdict_reason_name(VerdictReason r) {
  switch (r) {
    case VerdictReason::None:
      return "None";
    case VerdictReason::LogMismatch:
      return "LogMismatch";
    case VerdictReason::UnknownConfiguration:
      return "UnknownConfiguration";
    case VerdictReason::NonceMismatch:
      return "NonceMismatch";
  }
  return "None";
}

void ReferenceTable::add(
    const std::string& name,
    const std::vector<std::pair<uint8_t, Digest>>& values) {
  auto& cfg = configs_[name];
  for (const auto& [idx, d] : values) cfg[idx] = d;
}

void ReferenceTable::add_from_pcrs(const std::string& name,
                                   const tpm::PcrSelection& sel,
                                   const std::array<Digest, tpm::kNumPcrs>& bank) {
  auto& cfg = configs_[name];
  for (uint8_t idx : sel) cfg[idx] = bank[idx];
}

bool ReferenceTable::matches(const tpm::PcrSelection& selection,
                             const std::vector<Digest>& values) const {
  for (const auto& [name, cfg] : configs_) {
    bool all = true;
    for (size_t i = 0; i < selection.size() && all; ++i) {
      auto it = cfg.find(selection[i]);
      all = it != cfg.end() && it->second == values[i];
    }
    if (all && !selection.empty()) return true;
  }
  return false;
}

std::string ReferenceTable::save() const {
  std::ostringstream out;
  for (const auto& [name, cfg] : configs_) {
    out << "config " << name << "\n";
    for (const auto& [idx, d] : cfg)
      out << "pcr " << int(idx) << " " << to_hex(d.span()) << "\n";
  }
  return out.str();
}

ReferenceTable ReferenceTable::parse(const std::string& text) {
  ReferenceTable table;
  std::istringstream in(text);
  std::string line;
  std::string current;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string kw;
    if (!(ls >> kw) || kw[0] == '#') continue;
    if (kw == "config") {
      if (!(ls >> current))
        raise(ErrorCode::ConfigError, "reference table line " +
                                          std::to_string(lineno));
    } else if (kw == "pcr") {
      int idx;
      std::string hex;
      if (current.empty() || !(ls >> idx >> hex) || idx < 0 ||
          idx >= int(tpm::kNumPcrs) || hex.size() != 64) {
        raise(ErrorCode::ConfigError,
              "reference table line " + std::to_string(lineno));
      }
      table.configs_[current][uint8_t(idx)] = Digest::from(from_hex(hex));
    } else {
      raise(ErrorCode::ConfigError,
            "reference table line " + std::to_string(lineno));
    }
  }
  return table;
}

ReferenceTable ReferenceTable::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::FixtureMissing, path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

Verdict verify_log(const BootLog& log, const ReferenceTable& reference,
                   const Quote& quote, ByteSpan expected_nonce) {
  if (expected_nonce.size() != tpm::kNonceLen ||
      !std::equal(expected_nonce.begin(), expected_nonce.end(),
                  quote.external_nonce.begin())) {
    return Verdict::fail(VerdictReason::NonceMismatch);
  }

  // Events must carry honest digests and reproduce the quoted values.
  for (const auto& e : log.events) {
    if (e.pcr_index >= tpm::kNumPcrs ||
        crypto::hash(e.component_image) != e.digest) {
      return Verdict::fail(VerdictReason::LogMismatch);
    }
  }
  auto bank = log.replay();
  for (size_t i = 0; i < quote.selection.size(); ++i) {
    if (quote.selection[i] >= tpm::kNumPcrs)
      return Verdict::fail(VerdictReason::LogMismatch);
    if (bank[quote.selection[i]] != quote.pcr_values[i])
      return Verdict::fail(VerdictReason::LogMismatch);
  }

  if (!reference.matches(quote.selection, quote.pcr_values))
    return Verdict::fail(VerdictReason::UnknownConfiguration);
  return Verdict::ok();
}

}  // namespace trustbox::boot
