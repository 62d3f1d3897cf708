#pragma once

#include "ksa/core.hpp"
#include "ksa/authsig.hpp"
#include "ksa/sync_engine.hpp"
#include "ksa/trb.hpp"
#include "ksa/two_round.hpp"
#include "ksa/trb_ksa.hpp"
#include "ksa/shm_engine.hpp"
#include "ksa/snapshot_ksa.hpp"
#include "ksa/adversaries.hpp"
#include "ksa/checker.hpp"
#include "ksa/scenario.hpp"
#include "ksa/oracle.hpp"
#include "ksa/report.hpp"
#include "ksa/fuzz.hpp"
