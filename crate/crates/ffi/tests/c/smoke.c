#include <math.h>
#include <stdio.h>
#include <string.h>

#include "noodl.h"

#define CHECK(expr)                                                            \
  do {                                                                         \
    NoodlStatus s_ = (expr);                                                   \
    if (s_ != NOODL_STATUS_OK) {                                               \
      const char *msg = noodl_last_error();                                    \
      fprintf(stderr, "%s failed (%d): %s\n", #expr, (int)s_,                  \
              msg ? msg : "?");                                                \
      return 1;                                                                \
    }                                                                          \
  } while (0)

int main(void) {
  NoodlDictionary *truth = NULL;
  CHECK(noodl_dictionary_generate(30, 40, 1, &truth));
  size_t n = 0, m = 0;
  CHECK(noodl_dictionary_dims(truth, &n, &m));
  if (n != 30 || m != 40) return 2;

  double buf[30 * 40];
  CHECK(noodl_dictionary_copy_data(truth, buf, sizeof buf / sizeof buf[0]));
  double norm = 0.0;
  for (size_t i = 0; i < n; i++) norm += buf[i] * buf[i];
  if (fabs(norm - 1.0) > 1e-12) return 3;

  if (noodl_dictionary_from_data(NULL, 2, 2, true, &truth) !=
      NOODL_STATUS_NULL_POINTER)
    return 4;
  if (noodl_last_error() == NULL) return 5;

  const char *cfg =
      "{\"model\":{\"n\":30,\"m\":40,\"k\":2,\"c\":1.0,"
      "\"value_dist\":{\"kind\":\"rademacher\"},\"epsilon0\":0.3},"
      "\"solver\":{\"coeff\":{\"eta_x\":0.2,\"tau\":0.1,"
      "\"steps\":{\"fixed\":20},\"c\":1.0,\"stall_tol\":1e-12},"
      "\"eta_a\":4.0,\"max_iters\":5,\"eps_t\":1e-10,\"delta_t\":1e-9,"
      "\"dict_stop\":1e-10,\"p\":200,\"seed\":3}}";
  NoodlRun *run = NULL;
  CHECK(noodl_run(truth, cfg, NOODL_ALGORITHM_NOODL, &run));
  if (noodl_run_trace_len(run) != 5) return 6;
  NoodlTraceRow first, last;
  CHECK(noodl_run_trace_row(run, 0, &first));
  CHECK(noodl_run_trace_row(run, 4, &last));
  if (!(last.max_col_err < first.max_col_err)) return 7;
  NoodlTermination term;
  CHECK(noodl_run_termination(run, &term));
  if (term != NOODL_TERMINATION_MAX_ITERS) return 8;

  noodl_run_free(run);
  noodl_dictionary_free(truth);
  printf("ok %s\n", noodl_version());
  return 0;
}
