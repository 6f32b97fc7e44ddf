# Sphinx configuration for the cpdilate documentation.

import os
import sys

# Document the checked out package rather than an installed copy
sys.path.insert(0, os.path.join(os.path.abspath('.'), '..'))
import cpdilate

project = 'cpdilate'
copyright = '2024, The cpdilate developers'
author = 'The cpdilate developers'
release = cpdilate.__version__

extensions = ['sphinx.ext.autodoc',
              'sphinx.ext.intersphinx',
              'sphinx.ext.mathjax']
autodoc_member_order = 'bysource'
templates_path = ['_templates']
exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']

html_theme = 'alabaster'
html_static_path = ['_static']

intersphinx_mapping = {
    'numpy': ('https://numpy.org/doc/stable/', None),
    'scipy': ('https://docs.scipy.org/doc/scipy/', None),
    'python': ('https://docs.python.org/3', None)
}
