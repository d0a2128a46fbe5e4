from mongoengine import EmbeddedDocument, EmbeddedDocumentField, FloatField, IntField, ListField, StringField

ROUND_COLUMNS = ("seed", "round", "env", "algo", "variant", "env_steps", "j_hat_old", "j_hat_new", "j_hat_mix",
                 "selected", "lambda", "oracle_j", "wall_ms")
SUMMARY_COLUMNS = ("env", "algo", "variant", "n_seeds", "final_return_mean", "final_return_std", "rounds_to_95",
                   "variance_reduction_pct")
CURVE_COLUMNS = ("env", "algo", "variant", "round", "mean", "var")


# One profiling round; unset optional fields become empty CSV cells
class RoundRecord(EmbeddedDocument):
    seed = IntField(required=True, min_value=0)
    round = IntField(required=True, min_value=0)
    env = StringField(required=True)
    algo = StringField(required=True)
    variant = StringField(required=True, choices=("vanilla", "lb", "mu", "tp"))
    env_steps = IntField(required=True, min_value=0)
    eval_steps = IntField(default=0)
    j_hat_old = FloatField()
    j_hat_new = FloatField()
    j_hat_mix = FloatField()
    selected = StringField(required=True, choices=("old", "new", "mix"))
    lam = FloatField(db_field='lambda', default=None)
    oracle_j = FloatField(default=None)
    wall_ms = FloatField(default=None)
    params_checksum = StringField()

    def candidate_scores(self):
        scores = {'old': self.j_hat_old, 'new': self.j_hat_new, 'mix': self.j_hat_mix}
        return {tag: value for tag, value in scores.items() if value is not None}

    def selected_j_hat(self):
        return self.candidate_scores()[self.selected]


class CurvePoint(EmbeddedDocument):
    round = IntField(required=True, min_value=0)
    mean = FloatField(required=True)
    var = FloatField(required=True, min_value=0.0)


class MetricsRecord(EmbeddedDocument):
    env = StringField(required=True)
    algo = StringField(required=True)
    variant = StringField(required=True)
    n_seeds = IntField(required=True, min_value=1)
    final_return_mean = FloatField(required=True)
    final_return_std = FloatField(required=True, min_value=0.0)
    rounds_to_95 = IntField(default=None)  # None: threshold never reached
    variance_reduction_pct = FloatField(default=None)
    curve = ListField(EmbeddedDocumentField(CurvePoint))
