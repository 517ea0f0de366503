// Copyright (C) 2026 tablepref contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "tablepref/acceptability.hpp"
#include "tablepref/catalog.hpp"
#include "tablepref/dataset.hpp"
#include "tablepref/model_client.hpp"

namespace tablepref {

/// Body of every non-success response: {"error": {code, message, request_id}}.
struct ApiError {
    int status = 500;
    std::string code;
    std::string message;
    std::string request_id;

    nlohmann::json to_json() const;
};

/// Maps a caught exception to its HTTP status and machine code.
ApiError api_error_from(const std::exception& e, std::string request_id);

struct ServiceConfig {
    std::string data_dir;     // study store root
    std::string catalog_dir;  // empty: a placeholder catalog under data_dir/catalog
    std::string cors_origin = "*";
    JitterConfig jitter;
    /// Providers a /predict request may name. Inline providers are limited to mock.
    std::map<std::string, ProviderConfig> providers;
    std::size_t idempotency_cache = 4096;
};

/// HTTP JSON API over the study store, prediction and evaluation.
///
/// Routes:
///   GET  /health
///   GET  /catalog                      objects with sprite URLs
///   GET  /tables                       tables with image URLs
///   GET  /assets/...                   catalog files
///   POST /sessions                     {participant?, seed?}
///   GET  /sessions/{id}                session with per-trial status
///   POST /sessions/{id}/arrangements   {trial, arrangement}
///   POST /sessions/{id}/ratings        {trial, phase, rating}
///   GET  /sessions/{id}/jitter?trial=
///   POST /sessions/{id}/corrections    {trial, arrangement}
///   POST /predict                      {context, initial|table, method, grid?, samples?, provider, async?}
///   GET  /predict/{token}
///   POST /evaluate                     {gt, pred}
///
/// POST routes honour an Idempotency-Key header: a retry with the same key and
/// body replays the first response; the same key with a different body is 422.
class Service {
public:
    explicit Service(ServiceConfig cfg);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Binds to host:port (port 0 picks a free port) and returns the port.
    int bind(const std::string& host, int port);
    /// Serves until stop(). Call after bind().
    void run();
    /// bind() plus run() on a background thread.
    int start(const std::string& host, int port);
    void stop();

    DatasetStore& store();
    const Catalog& catalog() const;

    struct Impl;

private:
    std::unique_ptr<Impl> impl_;
};

}  // namespace tablepref
