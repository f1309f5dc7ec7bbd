"""Regenerates crates/core/data/word_classes.tsv from the seed lists below.

Verbs get -s/-ed/-ing forms and nouns get plurals by simple English rules;
irregular forms are listed explicitly.
"""
import pathlib

NOUNS = """
visa visit permit residence sponsor sponsorship company employer employee job work salary allowance contract
labour labor law court police ministry government embassy consulate passport id card license licence driving car
cars vehicle road traffic fine accident insurance bank account loan money cash credit debit transfer exchange rate
riyal dollar price cost fee fees rent apartment flat villa house home room building area place location city
country capital town village street mall shop store market supermarket restaurant hotel hospital clinic doctor
nurse medicine health test exam school nursery kindergarten university college student teacher class course
education language english arabic french hindi urdu lesson child children kid kids baby son daughter wife husband
family parent parents mother father brother sister friend people person man woman men women boy girl guy lady
question answer thread forum post comment information info advice help problem issue solution way option answer
time day days week weeks month months year years hour hours minute minutes morning evening night weekend today
tomorrow yesterday date holiday holidays ramadan eid festival celebration event national day december january
february march april may june july august september october november airport airline flight ticket travel trip
tour beach desert sea island park museum stadium cup football match game sport sports club gym pool team player
food dinner lunch breakfast coffee tea water drink alcohol pork meat chicken fish rice bread fruit vegetable
phone mobile number internet connection network service customer center centre office department branch center
document documents paper papers certificate degree attestation stamp letter form application process procedure
requirement requirements rule rules regulation policy system website site page link email address name list
dog dogs cat cats pet pets animal breed breeds vaccination vaccine shot shots vet
weather temperature summer winter heat sun rain dust
news article report source government official officer manager boss staff worker workers maid driver
nationality citizen citizens expat expats resident residents local locals qatari qataris indian indians filipino
british american french institute program programme curriculum property history addition age ages neighbor neighbour
yr period maximum minimum extension renewal exit entry visit deal offer discount sale purchase
camera computer laptop tv television device electricity gas fuel petrol ooredoo vodafone
marriage wedding divorce religion church mosque prayer
table tennis bowling league club nights lessons pre-school preschool
month's week's people's
""".split()

VERBS = """
be have do say get make go know take see come think look want give use find tell ask work seem feel try leave
call need become put mean keep let begin help talk turn start show hear play run move like live believe hold bring
happen write provide sit stand lose pay meet include continue set learn change lead understand watch follow stop
create speak read allow add spend grow open walk win offer remember love consider appear buy wait serve die send
expect build stay fall cut reach kill remain suggest raise pass sell require report decide pull apply renew extend
travel visit confirm check cancel transfer exit enter drive rent book arrive depart fly land hire employ sponsor
register submit attest process approve reject refuse deny accept receive contact email phone text post answer
reply search find guess realize realise discover regret notice forget recall reveal note observe acknowledge admit
claim suppose assume suspect hope imagine guarantee argue express manage hesitate neglect decline succeed fail
cause bother dare force attempt refrain avoid prevent enable permit oblige estimate indicate mention propose prove
state swear verify demand capture execute celebrate open close cost charge fine ban bring import export ship
recommend advise suggest wonder wish prefer hate enjoy teach study graduate transfer marry divorce pray vaccinate
confirm wanted asked told said got made went knew took saw came thought looked gave used found
""".split()

ADJECTIVES = """
good bad new old great high low small large big long short little own other same different right wrong true false
important possible impossible available free cheap expensive easy hard difficult simple clear sure certain
public private local national international official legal illegal able unable open closed full empty early late
young best better worse worst nice interesting qualified famous popular safe dangerous clean dirty hot cold warm
happy sad glad sorry fine correct real actual main major minor common normal usual necessary valid invalid
current recent next last previous first second third final whole entire several many much more most few less
various special specific general proper similar social personal medical economic political religious
family-friendly french english arabic indian british american qatari filipino european asian african
friendly helpful useful useless strict banned allowed mandatory optional required permanent temporary
expat weekly monthly yearly daily annual maximum minimum fresh
""".split()

ADVERBS = """
just also very only still even already now then here there again always never often sometimes usually really
quite too almost maybe perhaps probably possibly certainly obviously clearly definitely absolutely surely
actually basically generally simply exactly approximately essentially mostly mainly rather soon later ago
together away back far well yet instead however therefore otherwise anyway indeed especially particularly
directly immediately recently finally currently normally typically frankly honestly seriously unfortunately
fortunately hopefully apparently
""".split()

OTHER = """
a an the and or but if because as so than that this these those which who whom whose what when where why how
of in on at by for with about against between into through during before after above below to from up down out
off over under again further once all any both each few more most other some such no nor not only own same so
too very is am are was were be been being have has had having do does did doing will would shall should can could
may might must ought hi hello hey thanks thank please yes no ok okay etc via per
""".split()

IRREGULAR_VERB_FORMS = """
is am are was were been being has had does did done goes went gone says said gets got gotten makes made knows knew
known takes took taken sees saw seen comes came thinks thought gives gave given tells told finds found leaves left
feels felt brings brought begins began begun keeps kept holds held writes wrote written stands stood hears heard
lets meant means meets met pays paid runs ran sits sat speaks spoke spoken spends spent grows grew grown loses lost
buys bought sends sent builds built falls fell fallen cuts teaches taught drives drove driven flies flew flown
""".split()

AUXILIARIES = set("be is am are was were been being have has had having do does did doing get gets got".split())


def verb_forms(v):
    forms = {v}
    if v.endswith("e"):
        forms |= {v + "s", v + "d", v[:-1] + "ing"}
    elif v.endswith("y") and len(v) > 2 and v[-2] not in "aeiou":
        forms |= {v[:-1] + "ies", v[:-1] + "ied", v + "ing"}
    elif v.endswith(("s", "sh", "ch", "x", "z")):
        forms |= {v + "es", v + "ed", v + "ing"}
    else:
        forms |= {v + "s", v + "ed", v + "ing"}
    return forms


def plural(n):
    if n.endswith(("s", "sh", "ch", "x", "z")):
        return n + "es"
    if n.endswith("y") and len(n) > 2 and n[-2] not in "aeiou":
        return n[:-1] + "ies"
    return n + "s"


def main():
    entries = {}

    def put(word, cls):
        entries.setdefault(word, cls)

    for w in OTHER:
        put(w, "Other")
    for w in AUXILIARIES:
        entries[w] = "Other"
    for w in IRREGULAR_VERB_FORMS:
        put(w, "Verb")
    for w in ADVERBS:
        put(w, "Adverb")
    for w in ADJECTIVES:
        put(w, "Adjective")
    for w in VERBS:
        for f in sorted(verb_forms(w)):
            put(f, "Verb")
    for w in NOUNS:
        put(w, "Noun")
        if "'" not in w:
            put(plural(w), "Noun")
    out = pathlib.Path(__file__).resolve().parent.parent / "crates/core/data/word_classes.tsv"
    with open(out, "w") as fh:
        fh.write("# term<TAB>class; classes: Noun Verb Adjective Adverb Pronoun Other\n")
        for w in sorted(entries):
            fh.write(f"{w}\t{entries[w]}\n")
    print(len(entries), "entries ->", out)


if __name__ == "__main__":
    main()
