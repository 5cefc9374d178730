import numpy as np
from hypothesis import strategies as st


def disk_points(r_max=0.95):
    """Hypothesis strategy for complex points with |z| <= r_max."""
    return st.builds(
        lambda r, t: r * np.exp(1j * t),
        st.floats(0.0, r_max),
        st.floats(0.0, 2 * np.pi),
    )
