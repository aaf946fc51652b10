import matplotlib
import matplotlib.pyplot as plt

#------------------------------------------------------------------------
# palette
deep_blue = '#012169'
ocean_blue = '#1A658F'
lighter_blue = '#007FA3'
teal = '#00797C'
lighter_teal = '#28939D'
highlight_green = '#A8C700'

SERIES_COLORS = [deep_blue, ocean_blue, lighter_blue, teal, lighter_teal, highlight_green]

matplotlib.rc('font', family='sans-serif')
matplotlib.rcParams['axes.prop_cycle'] = matplotlib.cycler(color=SERIES_COLORS)
#------------------------------------------------------------------------


def format_ax(ax):
    ax.grid(visible=True, which='major', color='#999999', linestyle='-', zorder=-1)
    ax.minorticks_on()
    ax.grid(visible=True, which='minor', color='#999999', linestyle='-', zorder=-1, alpha=0.2)
    return


def new_figure(xlabel, ylabel):
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    format_ax(ax)
    return fig, ax
