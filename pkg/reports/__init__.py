"""Reports package initialization"""
from .counts_file import CountsFileError, read_counts, counts_from_frame
from .emitters import posterior_table, summary_table, write_csv, render_chart, write_svg
from .presets import FigurePreset, PresetError, PRESETS, get_preset, smooth_preset
from .verification import CheckResult, VerificationReport, VerificationSuite

__all__ = [
    'CountsFileError',
    'read_counts',
    'counts_from_frame',
    'posterior_table',
    'summary_table',
    'write_csv',
    'render_chart',
    'write_svg',
    'FigurePreset',
    'PresetError',
    'PRESETS',
    'get_preset',
    'smooth_preset',
    'CheckResult',
    'VerificationReport',
    'VerificationSuite'
]
