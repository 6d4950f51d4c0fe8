#pragma once

#include <bridgewatch/analytics.hpp>
#include <bridgewatch/fact_store.hpp>
#include <bridgewatch/facts.hpp>
#include <bridgewatch/facts_io.hpp>
#include <bridgewatch/ingest.hpp>
#include <bridgewatch/keccak.hpp>
#include <bridgewatch/oracle.hpp>
#include <bridgewatch/rules.hpp>
#include <bridgewatch/scenario.hpp>
