// Copyright 2026 The mmrank Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mmrank/result_io.hpp"

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "mmrank/errors.hpp"

namespace mmrank {

using Json = nlohmann::ordered_json;

std::string content_digest(const std::string& bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

namespace {

Json manifest_json(const RunManifest& m) {
  Json j;
  j["tool"] = kToolVersion;
  j["command"] = m.command;
  Json inputs = Json::array();
  for (const auto& in : m.inputs)
    inputs.push_back(Json{{"path", in.path}, {"digest", in.digest}});
  j["inputs"] = inputs;
  j["models"] = m.model_labels;
  if (m.seed) j["seed"] = *m.seed;
  if (m.cutoff) j["cutoff"] = *m.cutoff;
  if (m.timing_seconds) j["timing_seconds"] = *m.timing_seconds;
  return j;
}

const char* link_name(Link link) {
  return link == Link::kProbit ? "probit" : "logit";
}

Link link_from(const std::string& s) {
  if (s == "probit") return Link::kProbit;
  if (s == "logit") return Link::kLogit;
  throw ParseError("unknown link '" + s + "'");
}

const char* method_name(Method m) {
  switch (m) {
    case Method::kPqlMl: return "pql-ml";
    case Method::kPqlReml: return "pql-reml";
    case Method::kLaplace: return "la";
    case Method::kFullyExponential: return "fe";
    case Method::kMease: return "mease";
    case Method::kFixedVariance: return "fixed";
  }
  return "?";
}

Method method_from(const std::string& s) {
  if (s == "pql-ml") return Method::kPqlMl;
  if (s == "pql-reml") return Method::kPqlReml;
  if (s == "la") return Method::kLaplace;
  if (s == "fe") return Method::kFullyExponential;
  if (s == "mease") return Method::kMease;
  if (s == "fixed") return Method::kFixedVariance;
  throw ParseError("unknown method '" + s + "'");
}

}  // namespace

std::string RunManifest::json() const { return manifest_json(*this).dump(2); }

std::string write_result(const FitResult& fit, const TeamIndex& index,
                         const RunManifest& manifest) {
  Json j;
  j["format"] = kResultFormat;
  Json model;
  model["label"] = fit.config.label();
  model["link"] = link_name(fit.config.link);
  model["fcs_mode"] = static_cast<int>(fit.config.fcs_mode);
  model["method"] = method_name(fit.config.method);
  if (fit.config.method == Method::kFixedVariance)
    model["fixed_sigma2"] = fit.config.fixed_sigma2;
  j["model"] = model;

  Json est;
  if (fit.params.has_beta) est["fcs_effect"] = fit.params.beta;
  est["variances"] = fit.params.variances;
  j["estimates"] = est;

  Json teams = Json::array();
  for (int t = 0; t < index.size(); ++t) {
    teams.push_back(Json{
        {"name", index.names[t]},
        {"division", index.division[t] == Division::FBS ? "FBS" : "FCS"},
        {"rating", fit.eta_hat[t]},
        {"cond_var", fit.cond_var_diag[t]},
    });
  }
  j["teams"] = teams;

  Json conv;
  conv["loglik_approx"] = fit.loglik_approx;
  conv["iterations"] = fit.iterations;
  conv["converged"] = fit.converged;
  conv["warnings"] = fit.warnings;
  j["fit"] = conv;
  j["manifest"] = manifest_json(manifest);
  return j.dump(2) + "\n";
}

StoredResult read_result(const std::string& json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const std::exception& e) {
    throw ParseError(std::string("bad result file: ") + e.what());
  }
  if (!j.contains("format") || j["format"] != kResultFormat)
    throw ParseError("not a recognized result file (format tag mismatch)");

  StoredResult out;
  const auto& model = j.at("model");
  out.fit.config.link = link_from(model.at("link").get<std::string>());
  out.fit.config.fcs_mode =
      static_cast<FcsMode>(model.at("fcs_mode").get<int>());
  out.fit.config.method = method_from(model.at("method").get<std::string>());
  if (model.contains("fixed_sigma2"))
    out.fit.config.fixed_sigma2 = model["fixed_sigma2"].get<double>();

  const auto& est = j.at("estimates");
  if (est.contains("fcs_effect")) {
    out.fit.params.has_beta = true;
    out.fit.params.beta = est["fcs_effect"].get<double>();
  }
  out.fit.params.variances = est.at("variances").get<std::vector<double>>();

  const auto& teams = j.at("teams");
  const int m = static_cast<int>(teams.size());
  out.fit.eta_hat.resize(m);
  out.fit.cond_var_diag.resize(m);
  for (int t = 0; t < m; ++t) {
    const auto& team = teams[t];
    const std::string name = team.at("name").get<std::string>();
    const std::string div = team.at("division").get<std::string>();
    out.index.names.push_back(name);
    out.index.division.push_back(div == "FBS" ? Division::FBS : Division::FCS);
    out.index.index_of[name] = t;
    if (div == "FBS") ++out.index.fbs_count;
    else ++out.index.fcs_count;
    out.fit.eta_hat[t] = team.at("rating").get<double>();
    out.fit.cond_var_diag[t] = team.at("cond_var").get<double>();
  }

  const auto& conv = j.at("fit");
  out.fit.loglik_approx = conv.at("loglik_approx").get<double>();
  out.fit.iterations = conv.at("iterations").get<int>();
  out.fit.converged = conv.at("converged").get<bool>();
  out.fit.warnings = conv.at("warnings").get<std::vector<std::string>>();
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write '" + path + "'");
  out << contents;
  if (!out) throw UsageError("short write to '" + path + "'");
}

}  // namespace mmrank
