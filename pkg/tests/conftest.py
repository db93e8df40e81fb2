import numpy as np
import pytest

from selfgallery.core import SELF_UPDATED, Sample, Template, gallery_enroll


def make_sample(sid, values, user=1, session=None):
    return Sample(id=sid, vector=np.atleast_1d(np.asarray(values, dtype=float)),
                  true_user=user, session=session)


def make_templates(values, start_id=0, user=1):
    """1-D or n-D values -> enrolled templates with sequential ids."""
    return [
        Template(sample=make_sample(start_id + i, v, user=user))
        for i, v in enumerate(values)
    ]


def accepted_template(sid, values, user, batch=1):
    return Template(
        sample=make_sample(sid, values, user=user),
        origin=SELF_UPDATED,
        inserted_at_batch=batch,
    )


def gallery_1d(user_values, cap=None):
    """{user: [scalar, ...]} -> enrolled gallery with sequential ids."""
    pairs = []
    sid = 0
    for user in sorted(user_values):
        for v in user_values[user]:
            pairs.append((user, make_sample(sid, [v], user=user)))
            sid += 1
    return gallery_enroll(pairs, cap=cap)


@pytest.fixture
def abc_gallery():
    # 1-D users A=1:{0}, B=2:{1.0}, C=3:{1.4}; cross pool {1.0, 1.4, 0.4}
    return gallery_1d({1: [0.0], 2: [1.0], 3: [1.4]})
