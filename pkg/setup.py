from setuptools import setup

setup(name='wignerness',
      version='1.0',
      description='Wignerness: Wigner entropy production in Gaussian bosonic networks',
      keywords = "Wigner entropy, entropy production, open quantum systems, harmonic chain, Lyapunov",
      license='GPL',
      packages=['wignerness'],
      python_requires='>=3.8',
      install_requires=[
            'numpy',
            'scipy',
            'pandas',
            'statsmodels'
      ],
      extras_require={
            'test': ['pytest']
      },
      entry_points = {
          'console_scripts': [
              'wignerness = wignerness.wignerness:main'
          ]
          }
      )
