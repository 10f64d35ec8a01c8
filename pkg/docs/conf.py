# Configuration file for the Sphinx documentation builder.
#
# For a full list of options see the documentation:
# https://www.sphinx-doc.org/en/master/usage/configuration.html

# -- Path setup --------------------------------------------------------------

import os
import sys
import textwrap

sys.path.insert(0, os.path.abspath('..'))
from obsideband.version import __version__
from obsideband.config import schema_table


# -- Project information -----------------------------------------------------

project = 'obsideband'
copyright = '2024, obsideband contributors'
author = 'obsideband contributors'

# The full version, including alpha/beta/rc tags
release = __version__


# -- General configuration ---------------------------------------------------

extensions = [
    'sphinx_click',
    'sphinx.ext.autodoc',
    'sphinx.ext.autosummary',
    'sphinx.ext.napoleon',
] # yapf: disable

templates_path = ['_templates']

exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']


# -- Options for HTML output -------------------------------------------------

html_theme = 'sphinx_rtd_theme'

html_static_path = ['_static']

# -- Options for autodoc -------------------------------------------------
# see https://www.sphinx-doc.org/en/master/usage/extensions/autodoc.html
autosummary_generate = True
autoclass_content = 'class'
autodoc_class_signature = 'separated'
autodoc_member_order = 'bysource'
autodoc_typehints = 'both'

# -- Generate the configuration key table for the RTD docs
with open('schema_rtd.rst', 'w') as f:
    f.write('.. code:: text\n\n' + textwrap.indent(schema_table(), '    ') + '\n')
