"""Global frame-grid parameters shared by every module."""

SAMPLE_RATE = 22050
HOP_LENGTH = 256
WIN_LENGTH = 1024
N_MELS = 128

# MIDI ids occupy 0..127; silence/rest frames use the next embedding row.
REST_PITCH_ID = 128
PITCH_VOCAB = 129

F0_MIN_HZ = 40.0
F0_MAX_HZ = 1500.0

LOG_MEL_FLOOR = 1e-5


def frame_time(index: int) -> float:
    """Center time in seconds of a frame on the global grid."""
    return index * HOP_LENGTH / SAMPLE_RATE
