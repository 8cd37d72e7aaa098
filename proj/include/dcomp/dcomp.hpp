#pragma once

#include "dcomp/analysis.hpp"
#include "dcomp/ans.hpp"
#include "dcomp/bench.hpp"
#include "dcomp/bytes.hpp"
#include "dcomp/container.hpp"
#include "dcomp/dcwt.hpp"
#include "dcomp/error.hpp"
#include "dcomp/json_io.hpp"
#include "dcomp/latency.hpp"
#include "dcomp/parallel.hpp"
#include "dcomp/pipeline.hpp"
#include "dcomp/plan.hpp"
#include "dcomp/pruner.hpp"
#include "dcomp/random.hpp"
#include "dcomp/scaling.hpp"
#include "dcomp/synth.hpp"
#include "dcomp/types.hpp"
