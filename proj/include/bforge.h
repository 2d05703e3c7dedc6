#ifndef BFORGE_H
#define BFORGE_H

/*
 * C interface to the blaschke-forge library: constructive diagonals and
 * operator-valued pinchings of finite operator truncations, with
 * machine-checkable certificates.
 *
 * All inputs and outputs are JSON strings (complex numbers as [re, im]
 * pairs); matrices-as-operators travel behind the opaque bforge_operator
 * handle. Every function returns a status code; on failure
 * bforge_last_error() carries a message for the calling thread.
 */

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bforge_status {
  BFORGE_OK = 0,
  BFORGE_VERDICT = 1, /* negative verdict or failed precondition */
  BFORGE_NUMERIC = 2, /* attainment / realization budget exhausted */
  BFORGE_INPUT = 3    /* malformed or inconsistent input */
} bforge_status;

typedef struct bforge_operator bforge_operator;

const char* bforge_last_error(void);
void bforge_string_free(char* s);

/* {"kind":"dense"|"shift"|"weighted_shift"|"jordan"|"diagonal", "dim":n,
    "entries":..., "weights":..., "lambda":[re,im]} */
bforge_status bforge_operator_load(const char* spec_json, bforge_operator** out);
void bforge_operator_free(bforge_operator* op);
int bforge_operator_dim(const bforge_operator* op);
int bforge_operator_bandwidth(const bforge_operator* op);

/* CSV columns theta,value,re,im */
bforge_status bforge_numrange_boundary(const bforge_operator* op, int samples,
                                       char** csv_out);

/* validates region (eroded by margin) against the sampled range; returns the
   tagged region */
bforge_status bforge_we_model(const bforge_operator* op, const char* region_json,
                              double margin, int samples, char** region_out);

/* eps_json: list of [re,im]; emits points/weights of the decomposition */
bforge_status bforge_moment_decompose(const char* eps_json, double rho,
                                      char** json_out);

/* options_json (all optional): {"steps":K, "seed":0, "groups":1,
   "margin":0.0, "samples":720, "tol":-1} */
bforge_status bforge_build_diagonal(const bforge_operator* op,
                                    const char* region_json,
                                    const char* targets_json,
                                    const char* options_json, char** frame_out,
                                    char** cert_out);

bforge_status bforge_build_approx(const bforge_operator* op,
                                  const char* targets_json,
                                  const char* alphas_json,
                                  const char* region_json /* may be NULL */,
                                  const char* options_json, char** frame_out,
                                  char** cert_out);

bforge_status bforge_build_power(const bforge_operator* op,
                                 const char* targets_json, int n,
                                 const char* rho_model_json,
                                 const char* options_json, char** frame_out,
                                 char** cert_out);

bforge_status bforge_build_schatten(const bforge_operator* op,
                                    const char* targets_json, double p,
                                    const char* region_json,
                                    const char* options_json, char** frame_out,
                                    char** cert_out, char** report_out);

/* blocks_json: list of complex matrices (or scalars) */
bforge_status bforge_pinch(const bforge_operator* op, const char* blocks_json,
                           const char* options_json, char** plan_out);

bforge_status bforge_pinch_power(const bforge_operator* op,
                                 const char* blocks_json, int n,
                                 const char* options_json, char** plan_out);

/* kind: blaschke | positive | functional | shift | unitary | kadison;
   payload fields depend on the kind (see the CLI documentation). Returns
   BFORGE_VERDICT when the verdict is negative. */
bforge_status bforge_check(const char* kind, const char* payload_json,
                           char** verdict_out);

/* re-audits an emitted frame/certificate pair against the operator */
bforge_status bforge_verify(const bforge_operator* op, const char* frame_json,
                            const char* cert_json, char** report_out);

/* re-audits an emitted pinching plan */
bforge_status bforge_verify_plan(const bforge_operator* op,
                                 const char* plan_json, char** report_out);

#ifdef __cplusplus
}
#endif

#endif /* BFORGE_H */
