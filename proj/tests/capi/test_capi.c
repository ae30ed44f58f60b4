/* Exercises libtod from C. */
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "tod/tod.h"

static int failures = 0;

#define EXPECT(cond)                                              \
  do {                                                            \
    if (!(cond)) {                                                \
      fprintf(stderr, "%s:%d: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                 \
    }                                                             \
  } while (0)

int main(void) {
  tod_scenario* sc = NULL;
  tod_run* run = NULL;
  double v = 0;
  int defined = -1, aborted = -1;
  const char* text = NULL;
  char* csv = NULL;
  uint64_t seed = 0;

  EXPECT(tod_scenario_load(NULL, &sc) == TOD_ERR_INVALID_ARGUMENT);
  EXPECT(tod_scenario_load(TOD_SOURCE_DIR "/scenarios/nope.scenario", &sc) == TOD_ERR_IO);
  EXPECT(sc == NULL);
  EXPECT(strstr(tod_last_error(), "nope.scenario") != NULL);
  EXPECT(strcmp(tod_status_name(TOD_ERR_VALIDATION), "validation") == 0);

  EXPECT(tod_scenario_load(TOD_SOURCE_DIR "/scenarios/g2g.scenario", &sc) == TOD_OK);
  EXPECT(tod_scenario_name(sc, &text) == TOD_OK && strcmp(text, "g2g") == 0);
  EXPECT(tod_scenario_set_seed(sc, 42) == TOD_OK);
  EXPECT(tod_scenario_seed(sc, &seed) == TOD_OK && seed == 42);

  EXPECT(tod_scenario_run(sc, &run) == TOD_OK);
  EXPECT(tod_run_aborted(run, &aborted, &text) == TOD_OK && aborted == 0);
  EXPECT(tod_run_metric(run, "g2g_ms:front", &v, &defined) == TOD_OK);
  EXPECT(defined == 1 && v > 90.0 && v < 120.0);
  EXPECT(tod_run_metric(run, "g2g_ms:rear", &v, &defined) == TOD_OK && defined == 0);
  EXPECT(tod_run_metric(run, "bogus", &v, &defined) == TOD_ERR_INVALID_ARGUMENT);
  EXPECT(tod_run_log_csv(run, &csv) == TOD_OK);
  EXPECT(csv != NULL && strncmp(csv, "t,desired_swa,", 14) == 0);
  tod_string_free(csv);
  EXPECT(tod_run_write(run, TOD_SOURCE_DIR "/README.md/out") == TOD_ERR_IO);
  tod_run_free(run);
  tod_scenario_free(sc);

  EXPECT(tod_scenario_load(TOD_SOURCE_DIR "/tests/data/runaway.scenario", &sc) == TOD_OK);
  run = NULL;
  EXPECT(tod_scenario_run(sc, &run) == TOD_ERR_ABORTED);
  EXPECT(run != NULL);
  EXPECT(tod_run_aborted(run, &aborted, &text) == TOD_OK && aborted == 1 && strstr(text, "bounds") != NULL);
  tod_run_free(run);
  tod_scenario_free(sc);

  EXPECT(tod_live_vehicle(TOD_SOURCE_DIR "/tests/data/bad_rate.scenario") == TOD_ERR_VALIDATION);

  if (failures) fprintf(stderr, "%d failures\n", failures);
  return failures ? 1 : 0;
}
