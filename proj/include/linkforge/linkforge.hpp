#pragma once
// Everything except the command-line front end.

#include "linkforge/config.hpp"
#include "linkforge/csv.hpp"
#include "linkforge/epilink.hpp"
#include "linkforge/error.hpp"
#include "linkforge/format.hpp"
#include "linkforge/gpd.hpp"
#include "linkforge/matcher.hpp"
#include "linkforge/netgraph.hpp"
#include "linkforge/parallel.hpp"
#include "linkforge/pipeline.hpp"
#include "linkforge/preprocess.hpp"
#include "linkforge/random.hpp"
#include "linkforge/records.hpp"
#include "linkforge/report.hpp"
#include "linkforge/service.hpp"
#include "linkforge/similarity.hpp"
#include "linkforge/synthgen.hpp"
#include "linkforge/text.hpp"
#include "linkforge/tuning.hpp"
