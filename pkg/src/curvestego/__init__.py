"""curvestego: hide closed curves in musical audio and get them back.

Images become simple closed tours through weighted stipple patterns; meshes
become single loops covering every triangle.  Either kind of curve is then
embedded in the sliding-window-summed STFT magnitudes of a carrier clip and
recovered from audio alone, even after lossy compression and frame
misalignment.
"""

from .audio_io import (
    AudioClip,
    CodecSpec,
    best_available_codec,
    bundled_codec,
    codec_roundtrip,
    default_mp3_codec,
    identity_codec,
    load_wav,
    save_wav,
)
from .embed import (
    EncodingConfig,
    PreparedTarget,
    StegoResult,
    choose_reparam,
    encode,
    encode_scales_in_phase,
    fit_shift_scale,
    load_sidecar,
    solve_magnitudes,
    viterbi_reparam,
)
from .extract import DecodedCurve, decode_at_shift, recover_alignment
from .hamiltonian import (
    DualGraph,
    TriangleMesh,
    dual_graph,
    hamiltonian_cycle,
    load_mesh,
    perfect_matching,
)
from .metrics import aligned_distortion, distortion, snr
from .spectral import Spectrogram, istft, stft, sws, sws_adjoint
from .stipple import build_weights, canny_edges, load_image, voronoi_stipple
from .tour import (
    Curve,
    curvature_flow,
    curve_length,
    has_self_crossing,
    mst_tour,
    resample_closed,
    two_opt,
)

__version__ = "0.1.0"
